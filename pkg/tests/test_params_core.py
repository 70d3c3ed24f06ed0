import numpy as np
import pytest
from pydantic import ValidationError

from params_core import SystemParams, feedback_strength, loop_phase, response_at, total_kappa


def test_defaults_give_unit_kappa_and_full_feedback():
    p = SystemParams()
    assert p.kappa == 1.0
    assert p.k == pytest.approx(1.0)
    assert total_kappa(p) == p.kappa
    assert feedback_strength(p) == p.k


def test_loss_reduces_feedback_strength():
    p = SystemParams(loss=0.05)
    assert p.k == pytest.approx(np.sqrt(0.95), rel=1e-15)


def test_one_sided_cavity_has_no_feedback():
    assert SystemParams(kappa_b=1.0, kappa_c=0.0).k == 0.0


@pytest.mark.parametrize("kwargs", [
    {'loss': 1.5},
    {'loss': -0.1},
    {'tau': -1.0},
    {'eps_mag': -0.2},
    {'kappa_b': 0.0, 'kappa_c': 0.0},
    {'phi': float('nan')},
    {'unknown': 1.0},
])
def test_invalid_parameters_rejected(kwargs):
    with pytest.raises(ValidationError):
        SystemParams(**kwargs)


def test_params_are_frozen_and_hashable():
    p = SystemParams(eps_mag=0.5)
    with pytest.raises(ValidationError):
        p.eps_mag = 0.3
    assert hash(p) == hash(SystemParams(eps_mag=0.5))


def test_replace_validates_and_keeps_other_fields():
    p = SystemParams(eps_mag=0.5, tau=1.0)
    q = p.replace(tau=2.0)
    assert (q.tau, q.eps_mag) == (2.0, 0.5)
    with pytest.raises(ValidationError):
        p.replace(loss=2.0)


def test_from_feedback_strength_pyragas_cavity():
    loss = 0.05
    k = 0.5 * np.sqrt(1 - loss)
    p = SystemParams.from_feedback_strength(k, loss=loss)
    assert p.kappa == pytest.approx(1.0)
    assert p.kappa_b == pytest.approx(0.5 * (1 + np.sqrt(0.75)), rel=1e-12)
    assert p.kappa_b >= p.kappa_c
    assert p.k == pytest.approx(k, rel=1e-12)


def test_from_feedback_strength_rejects_unreachable_strength():
    with pytest.raises(ValueError):
        SystemParams.from_feedback_strength(1.0, loss=0.1)


def test_eps_combines_magnitude_and_phase():
    p = SystemParams(eps_mag=0.5, eps_phase=np.pi / 2)
    assert p.eps == pytest.approx(0.5j)


def test_response_without_feedback():
    p = SystemParams(kappa_b=1.0, kappa_c=0.0, eps_mag=0.3)
    r = response_at(p, 0.7)
    assert r.d_plus == pytest.approx(1.0 - 0.7j)
    assert r.d_minus == pytest.approx(1.0 - 0.7j)
    assert r.m == pytest.approx((1.0 - 0.7j) ** 2 - 0.09)
    assert r.f_b == pytest.approx(2.0)


def test_response_scalar_and_array_agree():
    p = SystemParams(eps_mag=0.4, tau=1.3, phi=0.2, delta=0.1, loss=0.02)
    nu = np.linspace(-2, 2, 9)
    arr = response_at(p, nu)
    for i, n in enumerate(nu):
        r = response_at(p, float(n))
        assert isinstance(r.m, complex)
        assert arr.m[i] == pytest.approx(r.m, abs=1e-15)


def test_m_is_consistent_with_d_plus_d_minus():
    p = SystemParams(eps_mag=0.6, tau=2.0, phi=-0.4, delta=0.25)
    r = response_at(p, np.linspace(-3, 3, 101))
    assert np.max(r.m_residual()) < 1e-15


def test_mirror_symmetry_of_d():
    p = SystemParams(eps_mag=0.6, tau=2.0, phi=-0.4, delta=0.25)
    nu = np.linspace(-3, 3, 61)
    here, mirror = response_at(p, nu), response_at(p, -nu)
    np.testing.assert_allclose(mirror.d_plus, np.conj(here.d_minus), atol=1e-14)


def test_loop_phase_has_unit_modulus():
    p = SystemParams(tau=3.0, phi=0.7)
    np.testing.assert_allclose(np.abs(loop_phase(p, np.linspace(-5, 5, 11))), 1.0, atol=1e-15)


@pytest.mark.parametrize("phi", [0.0, np.pi, -np.pi])
def test_d_plus_equals_d_minus_without_phase_or_detuning(phi):
    p = SystemParams(kappa_b=0.7, kappa_c=0.3, eps_mag=0.4, tau=2.5, phi=phi)
    r = response_at(p, np.linspace(-3, 3, 121))
    np.testing.assert_allclose(r.d_plus, r.d_minus, rtol=0, atol=1e-14)


def test_modulus_of_m_is_even_without_phase_or_detuning():
    p = SystemParams(eps_mag=0.75, tau=1.8833)
    nu = np.linspace(-3, 3, 121)
    np.testing.assert_allclose(np.abs(response_at(p, -nu).m), np.abs(response_at(p, nu).m), rtol=1e-12)


def test_feedback_strength_decreases_with_loss_and_peaks_for_equal_mirrors():
    strengths = [feedback_strength(SystemParams(loss=loss)) for loss in np.linspace(0, 1, 21)]
    assert np.all(np.diff(strengths) < 0)
    assert strengths[-1] == 0.0
    for kappa_b in (0.1, 0.3, 0.45, 0.55, 0.9):
        p = SystemParams(kappa_b=kappa_b, kappa_c=1.0 - kappa_b, loss=0.2)
        assert feedback_strength(p) < feedback_strength(SystemParams(loss=0.2))
