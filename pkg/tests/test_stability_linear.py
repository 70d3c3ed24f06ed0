import numpy as np
import pytest

from critical_points import characteristic_point
from params_core import SystemParams
from root_finder import Region
from shared.errors import ParameterDomainError
from stability_linear import (characteristic_derivative, characteristic_function, default_region,
                              max_real_part, rightmost_roots, stability_boundary_phi0,
                              stability_boundary_phipi, stability_verdict)


def test_undelayed_roots_are_analytic(symmetric):
    roots = rightmost_roots(symmetric)
    assert [r.lambda_re for r in roots] == pytest.approx([-1.25, -2.75])
    assert all(r.lambda_im == 0.0 for r in roots)
    assert all(r.residual < 1e-12 for r in roots)


def test_no_feedback_roots_ignore_delay():
    p = SystemParams(kappa_b=1.0, kappa_c=0.0, eps_mag=0.5, tau=2.0)
    assert [r.lambda_re for r in rightmost_roots(p)] == pytest.approx([-0.5, -1.5])


def test_degenerate_undelayed_root_has_multiplicity_two():
    roots = rightmost_roots(SystemParams())
    assert len(roots) == 1
    assert roots[0].value == pytest.approx(-2.0)
    assert roots[0].multiplicity == 2


def test_detuning_gives_complex_pair():
    p = SystemParams(kappa_b=1.0, kappa_c=0.0, eps_mag=0.3, delta=0.5)
    roots = rightmost_roots(p)
    assert [r.lambda_im for r in roots] == pytest.approx([0.4, -0.4])
    assert roots[0].lambda_re == pytest.approx(-1.0)


def test_derivative_matches_finite_difference(symmetric):
    p = symmetric.replace(tau=1.3, phi=0.4, delta=0.2)
    lam = np.array([0.3 + 0.7j, -1.2 - 2.0j])
    h = 1e-6
    numeric = (characteristic_function(p, lam + h) - characteristic_function(p, lam - h)) / (2 * h)
    np.testing.assert_allclose(characteristic_derivative(p, lam), numeric, rtol=1e-7)


def test_scalar_characteristic_function_returns_complex(symmetric):
    assert isinstance(characteristic_function(symmetric, 0.5), complex)


def test_default_region_covers_the_possible_right_edge(symmetric):
    region = default_region(symmetric.replace(tau=0.5))
    assert region.re_min == -5.0
    assert region.re_max == pytest.approx(2.25)
    assert region.im_max == pytest.approx(max(10.0, 6 * np.pi / 0.5))
    assert default_region(symmetric.replace(tau=4.0)).im_max == 10.0


def test_delayed_roots_are_sorted_and_accurate(symmetric):
    p = symmetric.replace(tau=1.0)
    roots = rightmost_roots(p)
    assert len(roots) > 2
    re = [r.lambda_re for r in roots]
    assert re == sorted(re, reverse=True)
    values = np.abs(characteristic_function(p, np.array([r.value for r in roots])))
    assert np.all(values < 1e-8)


def test_stable_below_and_unstable_above_characteristic_delay(symmetric):
    assert max_real_part(symmetric.replace(tau=1.0)) < 0.0
    assert max_real_part(symmetric.replace(tau=2.0)) > 0.0


def test_rightmost_root_sits_on_the_axis_at_characteristic_delay(symmetric):
    point = characteristic_point(symmetric)
    roots = rightmost_roots(symmetric.replace(tau=point.tau_c))
    top = roots[0]
    assert abs(top.lambda_re) < 1e-6
    assert abs(top.lambda_im) == pytest.approx(point.nu_c, abs=1e-6)


def test_verdict_reports_rightmost_frequency(symmetric):
    verdict = stability_verdict(symmetric.replace(tau=1.0))
    assert verdict
    assert verdict.max_re < 0.0
    assert verdict.dominant_frequency >= 0.0
    assert not stability_verdict(symmetric.replace(tau=2.0))


def test_empty_region_is_trivially_stable(symmetric):
    far = Region(5.0, 6.0, -1.0, 1.0)
    assert rightmost_roots(symmetric, far) == []
    assert max_real_part(symmetric, far) == float('-inf')


def test_phi0_boundary_requires_zero_phase(symmetric, pyragas):
    assert stability_boundary_phi0(symmetric.replace(tau=1.0))
    with pytest.raises(ParameterDomainError):
        stability_boundary_phi0(pyragas)
    with pytest.raises(ParameterDomainError):
        stability_boundary_phi0(symmetric.replace(delta=0.1))


def test_phipi_boundary_is_delay_independent(pyragas):
    assert stability_boundary_phipi(pyragas)
    assert not stability_boundary_phipi(pyragas.replace(eps_mag=0.6))
    with pytest.raises(ParameterDomainError):
        stability_boundary_phipi(pyragas.replace(phi=0.0))


@pytest.mark.parametrize("tau", [0.5, 3.0])
def test_pyragas_feedback_is_stable(pyragas, tau):
    assert max_real_part(pyragas.replace(tau=tau)) < 0.0


@pytest.mark.slow
def test_pyragas_feedback_is_stable_across_delays(pyragas):
    for tau in np.linspace(0.2, 10.0, 50):
        verdict = stability_verdict(pyragas.replace(tau=float(tau)))
        assert verdict.stable, f"tau={tau}: max_re={verdict.max_re}"


@pytest.mark.parametrize("params, tau", [("symmetric", 1.0), ("symmetric", 2.5), ("pyragas", 3.0)])
def test_root_set_is_closed_under_conjugation(params, tau, request):
    p = request.getfixturevalue(params).replace(tau=tau)
    values = np.array([r.value for r in rightmost_roots(p)])
    complex_roots = values[np.abs(values.imag) > 1e-10]
    assert complex_roots.size > 0
    for value in complex_roots:
        assert np.min(np.abs(values - np.conj(value))) < 1e-10
