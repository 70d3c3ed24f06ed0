"""
Roots of analytic functions in a rectangle of the complex plane.

Roots are located by damped Newton iteration from a uniform seed grid and the
count is certified with the argument principle on the rectangle boundary.
Everything is vectorized over seeds; the callables must accept complex
numpy arrays.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from shared.errors import ContourHitsRoot, IncompleteRootSearch, NumericalError

logger = logging.getLogger(__name__)

ComplexFunc = Callable[[np.ndarray], np.ndarray]

MAX_PHASE_STEP = np.pi / 2


@dataclass(frozen=True)
class Region:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def contains(self, z: np.ndarray, margin: float = 0.0) -> np.ndarray:
        z = np.asarray(z)
        return ((z.real > self.re_min - margin) & (z.real < self.re_max + margin)
                & (z.imag > self.im_min - margin) & (z.imag < self.im_max + margin))

    def perturbed(self, amount: float) -> 'Region':
        """Slightly enlarged region with uneven edge shifts."""
        return Region(self.re_min - amount, self.re_max + 0.7 * amount,
                      self.im_min - 0.9 * amount, self.im_max + 0.8 * amount)

    def boundary(self, spacing: float) -> np.ndarray:
        """Counter-clockwise closed path (first point repeated at the end)."""
        corners = [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                   complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]
        pieces = []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            n = max(4, int(np.ceil(abs(b - a) / spacing)))
            pieces.append(a + (b - a) * np.arange(n) / n)
        path = np.concatenate(pieces)
        return np.append(path, path[0])


@dataclass
class RootSearch:
    """Outcome of a certified search."""

    region: Region
    roots: np.ndarray
    multiplicities: List[int]
    residuals: np.ndarray
    winding: Optional[int]
    attempts: int = 1

    @property
    def complete(self) -> bool:
        return self.winding is None or self.winding == sum(self.multiplicities)


def path_winding(func: ComplexFunc, path: np.ndarray, max_points: int = 2_000_000) -> int:
    """
    Winding number of func along a closed path, refining segments until each
    phase increment is below pi/2.
    """
    z = np.asarray(path, dtype=complex)
    w = func(z)
    while True:
        if not np.all(np.isfinite(w)):
            raise NumericalError("non-finite function value on the counting contour")
        if np.any(w == 0):
            raise ContourHitsRoot("function vanishes on the counting contour")
        dphi = np.angle(w[1:] / w[:-1])
        bad = np.abs(dphi) >= MAX_PHASE_STEP
        if not bad.any():
            return int(np.rint(dphi.sum() / (2 * np.pi)))
        seg = np.abs(z[1:] - z[:-1])
        if np.any(seg[bad] < 1e-12 * (1 + np.abs(z[:-1][bad]))):
            raise ContourHitsRoot("phase jump does not resolve under refinement")
        if z.size > max_points:
            raise NumericalError(f"counting contour exceeded {max_points} points")
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (z[idx] + z[idx + 1])
        z = np.insert(z, idx + 1, mids)
        w = np.insert(w, idx + 1, func(mids))


def winding_number(func: ComplexFunc, region: Region, spacing: float = 0.05) -> int:
    """Number of roots (with multiplicity) inside the rectangle."""
    return path_winding(func, region.boundary(spacing))


def newton_polish(func: ComplexFunc, dfunc: ComplexFunc, seeds: np.ndarray, region: Region,
                  max_iter: int = 80, step_tol: float = 1e-13, escape_margin: float = 1.0):
    """
    Damped Newton iteration from every seed at once.

    Returns:
        (points, converged) arrays of the same length as seeds
    """
    z = np.array(seeds, dtype=complex)
    f = func(z)
    active = np.isfinite(f)
    converged = np.zeros(z.shape, dtype=bool)
    converged[f == 0] = True
    active &= ~converged

    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        zi, fi = z[idx], f[idx]
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            step = fi / dfunc(zi)
        finite = np.isfinite(step)
        step = np.where(finite, step, 0.0)
        mu = np.ones(idx.size)
        tiny = step_tol * (1 + np.abs(zi))
        new = zi - step
        with np.errstate(over='ignore', invalid='ignore'):
            fnew = func(new)
            for _ in range(8):
                worse = ~(np.abs(fnew) < np.abs(fi)) & (mu * np.abs(step) > tiny)
                if not worse.any():
                    break
                mu[worse] *= 0.5
                new[worse] = zi[worse] - mu[worse] * step[worse]
                fnew[worse] = func(new[worse])

        z[idx], f[idx] = new, fnew
        done = finite & ((mu * np.abs(step) <= tiny) | (fnew == 0))
        escaped = ~finite | ~np.isfinite(fnew) | ~region.contains(new, escape_margin)
        converged[idx[done]] = True
        active[idx[done | escaped]] = False

    return z, converged


def dedupe(roots: np.ndarray, residuals: np.ndarray, tol: float = 1e-6):
    """Cluster nearby roots, keeping the best-residual representative of each."""
    order = np.argsort(residuals, kind='stable')
    kept: List[complex] = []
    kept_res: List[float] = []
    for i in order:
        r = roots[i]
        if kept and np.min(np.abs(np.asarray(kept) - r)) <= tol * (1 + abs(r)):
            continue
        kept.append(r)
        kept_res.append(residuals[i])
    kept_arr = np.asarray(kept, dtype=complex)
    res_arr = np.asarray(kept_res, dtype=float)
    order = np.lexsort((-kept_arr.imag, -kept_arr.real))
    return kept_arr[order], res_arr[order]


def multiplicity(func: ComplexFunc, root: complex, radius: float) -> int:
    """Winding number of func around a small circle centred on root."""
    circle = root + radius * np.exp(2j * np.pi * np.arange(65) / 64)
    circle[-1] = circle[0]
    return path_winding(func, circle)


def seed_grid(region: Region, step: float) -> np.ndarray:
    re = np.arange(region.re_min + step / 2, region.re_max, step)
    im = np.arange(region.im_min + step / 2, region.im_max, step)
    rr, ii = np.meshgrid(re, im)
    return (rr + 1j * ii).ravel()


def find_roots(func: ComplexFunc, dfunc: ComplexFunc, region: Region, seed_step: float = 0.25,
               extra_seeds: Optional[np.ndarray] = None, scale: Optional[ComplexFunc] = None,
               residual_tol: float = 1e-10, certify: bool = True,
               max_attempts: int = 5) -> RootSearch:
    """
    All roots inside the region, sorted by descending real part.

    Args:
        func, dfunc: Analytic function and its derivative
        region: Search rectangle
        seed_step: Newton seed spacing
        extra_seeds: Additional starting points (e.g. known analytic roots)
        scale: Magnitude of the terms of func, for the relative residual test
        residual_tol: Accepted |func| relative to scale
        certify: Count roots with the argument principle
        max_attempts: Region perturbations tried when the contour hits a root

    Raises:
        ContourHitsRoot: every perturbed contour passed through a root
        IncompleteRootSearch: winding count and found multiplicities disagree
    """
    winding = None
    attempts = 1
    if certify:
        for attempts in range(1, max_attempts + 1):
            try:
                winding = winding_number(func, region)
                break
            except ContourHitsRoot:
                logger.warning(f"Counting contour hit a root (attempt {attempts}); perturbing region")
                region = region.perturbed(1e-3 * attempts)
        else:
            raise ContourHitsRoot(f"contour hits a root after {max_attempts} perturbations")

    step = seed_step
    for refinement in range(2):
        seeds = seed_grid(region, step)
        if extra_seeds is not None:
            seeds = np.concatenate([seeds, np.asarray(extra_seeds, dtype=complex)])
        # unconverged iterates (multiple roots stall near rounding level) still pass on residual
        points, _ = newton_polish(func, dfunc, seeds, region)
        points = points[np.isfinite(points) & region.contains(points)]
        values = np.abs(func(points)) if points.size else np.zeros(0)
        ref = scale(points) if scale is not None and points.size else np.ones(points.shape)
        good = values <= residual_tol * np.maximum(ref, 1.0)
        roots, residuals = dedupe(points[good], values[good])
        mults = _multiplicities(func, roots)
        search = RootSearch(region, roots, mults, residuals, winding, attempts)
        logger.debug(f"{seeds.size} seeds -> {roots.size} roots (winding {winding})")
        if search.complete:
            return search
        step /= 2
        extra_seeds = roots

    raise IncompleteRootSearch(
        f"winding count {winding} but located multiplicity {sum(search.multiplicities)}",
        roots=list(search.roots), expected=winding or 0, found=sum(search.multiplicities))


def _multiplicities(func: ComplexFunc, roots: np.ndarray) -> List[int]:
    mults = []
    for i, r in enumerate(roots):
        others = np.delete(roots, i)
        sep = np.min(np.abs(others - r)) if others.size else np.inf
        radius = min(1e-3 * (1 + abs(r)), 0.3 * sep)
        try:
            mults.append(max(1, multiplicity(func, r, radius)))
        except NumericalError:
            mults.append(1)
    return mults
