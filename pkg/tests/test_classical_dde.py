import numpy as np
import pytest
from pydantic import ValidationError

from classical_dde import (Branch, ClassicalParams, Dynamics, SteadyState, classify_longtime,
                           default_step, dde_rhs, hopf_locus, integrate, linearize_at,
                           oscillation_threshold, steady_state_diagram, steady_state_residual,
                           steady_states)
from critical_points import characteristic_point
from params_core import SystemParams
from shared.errors import IntegrationError, ParameterDomainError, UndecidableDynamics
from stability_linear import max_real_part, rightmost_roots


@pytest.fixture
def one_sided():
    return ClassicalParams(kappa_b=1.0, kappa_c=0.0)


def test_pump_decay_defaults_to_kappa():
    assert ClassicalParams().kappa_p == 1.0
    assert ClassicalParams(kappa_b=1.0, kappa_c=1.0).kappa_p == 2.0
    assert ClassicalParams(kappa_p=0.3).kappa_p == 0.3
    with pytest.raises(ValidationError):
        ClassicalParams(x=-1.0)


def test_undepleted_counterpart():
    q = ClassicalParams(kappa_b=1.0, kappa_c=0.5, x=0.4, tau=2.0, phi=0.3)
    p = q.undepleted()
    assert p.eps_mag == pytest.approx(0.6)
    assert (p.tau, p.phi, p.k) == (2.0, 0.3, pytest.approx(q.k))
    assert ClassicalParams.from_system(p, x=0.4) == q


@pytest.mark.parametrize("params, expected", [
    (ClassicalParams(), 2.0),
    (ClassicalParams(kappa_b=1.0, kappa_c=0.0), 1.0),
    (ClassicalParams(loss=0.75, phi=np.pi), 0.5),
    (ClassicalParams(kappa_b=1.0, kappa_c=0.0, delta=0.75), 1.25),
])
def test_oscillation_threshold(params, expected):
    assert oscillation_threshold(params) == pytest.approx(expected, rel=1e-12)


def test_below_threshold_only_trivial_state(one_sided):
    states = steady_states(one_sided.replace(x=0.9))
    assert [s.branch for s in states] == [Branch.TRIVIAL]
    assert states[0].pump == 0.9


def test_pitchfork_branches_above_threshold(one_sided):
    states = steady_states(one_sided.replace(x=2.0))
    assert [s.branch for s in states] == [Branch.TRIVIAL, Branch.UPPER, Branch.LOWER]
    assert states[1].eps == pytest.approx(1.0)
    assert states[2].eps == pytest.approx(-1.0)
    assert states[1].pump == pytest.approx(1.0)


def test_detuned_branches_are_stationary():
    q = ClassicalParams(kappa_b=0.7, kappa_c=0.3, phi=0.7, delta=0.2, tau=1.5, x=3.0)
    states = steady_states(q)
    assert len(states) == 3
    a = 1 + q.k / q.kappa * np.cos(q.phi)
    b = q.k / q.kappa * np.sin(q.phi) + q.delta / q.kappa
    for ss in states[1:]:
        assert steady_state_residual(q, ss) < 1e-12
        assert abs(ss.eps) ** 2 == pytest.approx(np.sqrt(9.0 - b ** 2) - a)


def test_branch_stability_without_delay(one_sided):
    states = steady_states(one_sided.replace(x=2.0), assess_stability=True)
    assert [s.stable for s in states] == [False, True, True]


def test_diagram_rows(one_sided):
    frame = steady_state_diagram(one_sided, [0.5, 2.0])
    assert list(frame.columns) == ['x', 'branch', 'eps_re', 'eps_im', 'eps_abs', 'pump_re', 'pump_im',
                                   'stable']
    assert frame['branch'].tolist() == ['trivial', 'trivial', 'upper', 'lower']
    assert frame['stable'].tolist() == [True, False, True, True]


def test_rhs_matches_complex_form():
    q = ClassicalParams(phi=0.4, delta=0.3, x=0.8, kappa_p=0.7)
    eps, pump, eps_d = 0.3 - 0.2j, 0.5 + 0.1j, -0.1 + 0.4j
    out = dde_rhs([eps.real, eps.imag, pump.real, pump.imag], [eps_d.real, eps_d.imag, 0.0, 0.0], q)
    d_eps = -(q.kappa + 1j * q.delta) * eps + q.kappa * eps.conjugate() * pump \
        - np.exp(1j * q.phi) * q.k * eps_d
    d_pump = -q.kappa_p * (pump + eps ** 2 - q.x)
    np.testing.assert_allclose(out, [d_eps.real, d_eps.imag, d_pump.real, d_pump.imag], atol=1e-15)


def test_default_step_divides_the_delay(fig9_params):
    h = default_step(fig9_params)
    assert h <= 0.01
    ratio = fig9_params.tau / h
    assert ratio == pytest.approx(round(ratio), abs=1e-9)
    assert default_step(ClassicalParams()) == 0.01


def test_integration_without_delay_reaches_upper_branch(one_sided):
    q = one_sided.replace(x=2.0)
    traj = integrate(q, (0.5, 0.0), t_end=40.0)
    assert traj.eps[-1] == pytest.approx(1.0, abs=1e-6)
    assert traj.pump[-1] == pytest.approx(1.0, abs=1e-6)
    assert traj.t[0] == 0.0 and traj.t[-1] == pytest.approx(40.0)


def test_integration_is_fourth_order(fig9_params):
    q = fig9_params.replace(x=0.745)
    tau = q.tau
    finals = [integrate(q, (0.5, 0.0), t_end=30.0, step=tau / n).states[-1] for n in (20, 40, 80)]
    ratio = np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])
    assert 8.0 <= ratio <= 32.0


def test_run_ends_exactly_at_the_requested_time(fig9_params):
    q = fig9_params.replace(x=0.745)
    coarse = integrate(q, (0.5, 0.0), t_end=30.0, step=q.tau / 40)
    fine = integrate(q, (0.5, 0.0), t_end=30.0, step=q.tau / 200)
    assert coarse.t[-1] == 30.0 and fine.t[-1] == 30.0
    assert 0.0 < coarse.t[-1] - coarse.t[-2] < coarse.step
    np.testing.assert_allclose(coarse.states[-1], fine.states[-1], atol=1e-5)
    inside = 0.5 * (coarse.t[-2] + coarse.t[-1])
    np.testing.assert_allclose(coarse.evaluate(inside), fine.evaluate(inside), atol=1e-5)
    np.testing.assert_array_equal(coarse.evaluate(30.0), coarse.states[-1:])


def test_history_and_dense_output(fig9_params):
    q = fig9_params.replace(x=0.5)
    traj = integrate(q, (0.5, 0.1), t_end=5.0)
    np.testing.assert_array_equal(traj.delayed(q.tau * 0.5), [[0.5, 0.0, 0.1, 0.0]])
    np.testing.assert_allclose(traj.evaluate(traj.t[7]), traj.states[7:8])
    midpoint = traj.evaluate(0.5 * (traj.t[7] + traj.t[8]))[0]
    assert np.all(np.abs(midpoint - 0.5 * (traj.states[7] + traj.states[8])) < 1e-4)
    frame = traj.to_frame()
    assert list(frame.columns) == ['t', 'eps_re', 'eps_im', 'pump_re', 'pump_im', 'eps_abs']
    assert len(frame) == len(traj.t)


def test_step_longer_than_delay_rejected(fig9_params):
    with pytest.raises(IntegrationError):
        integrate(fig9_params, step=2.0)
    with pytest.raises(IntegrationError):
        integrate(fig9_params, t_end=0.0)


def test_blow_up_is_reported():
    with pytest.raises(IntegrationError):
        integrate(ClassicalParams(x=1e6), (0.5, 0.0), t_end=10.0, step=0.01)


def test_signal_linearization_matches_linear_model(fig9_params):
    q = fig9_params.replace(tau=1.0, x=0.5)
    trivial = steady_states(q)[0]
    lin = linearize_at(q, trivial, pump_depletion=False)
    assert lin.A.shape == (2, 2)
    assert lin.max_real_part() == pytest.approx(max_real_part(q.undepleted()), abs=1e-8)


def test_undelayed_linearization_uses_eigenvalues(fig9_params):
    q = fig9_params.replace(tau=0.0, x=0.5)
    lin = linearize_at(q, steady_states(q)[0], pump_depletion=False)
    expected = [r.value for r in rightmost_roots(q.undepleted())]
    np.testing.assert_allclose(lin.roots(), expected, atol=1e-12)


def test_depleted_trivial_state_adds_pump_decay(fig9_params):
    q = fig9_params.replace(tau=0.0, x=0.5)
    roots = linearize_at(q, steady_states(q)[0]).roots()
    assert len(roots) == 4
    assert np.sum(np.isclose(roots, -q.kappa_p)) == 2


def test_linearizing_a_non_stationary_state_fails(one_sided):
    q = one_sided.replace(x=2.0)
    bogus = SteadyState(0.3 + 0j, 0j, Branch.UPPER, 2.0)
    with pytest.raises(ParameterDomainError):
        linearize_at(q, bogus)


def test_hopf_point_below_threshold_matches_characteristic_point():
    point = characteristic_point(SystemParams(eps_mag=0.5))
    q = ClassicalParams()
    for depleted in (False, True):
        locus = hopf_locus(q, [point.tau_c], pump_depletion=depleted)
        assert len(locus) == 1
        assert locus[0].x == pytest.approx(0.5, abs=1e-4)
        assert locus[0].omega_hopf == pytest.approx(point.nu_c, abs=1e-3)


def test_hopf_locus_skips_delays_without_crossing():
    locus = hopf_locus(ClassicalParams(), [0.3], x_range=(0.2, 0.4))
    assert locus == []
    with pytest.raises(ParameterDomainError):
        hopf_locus(ClassicalParams(), [0.0])
    with pytest.raises(ParameterDomainError):
        hopf_locus(ClassicalParams(), [1.0], x_range=(0.5, 0.2))


@pytest.mark.slow
def test_hopf_points_lie_on_a_circle(fig9_params):
    locus = hopf_locus(fig9_params, [1.8, 2.2, 2.8, 3.5], x_range=(0.2, 1.0))
    assert len(locus) == 4
    drives = [point.x for point in locus]
    assert drives == sorted(drives, reverse=True)
    for point in locus:
        assert point.omega_hopf ** 2 + (point.x - 1.0) ** 2 == pytest.approx(1.0, abs=1e-3)


def test_short_run_is_undecidable(fig9_params):
    traj = integrate(fig9_params.replace(tau=1.88, x=0.5), t_end=5.0)
    with pytest.raises(UndecidableDynamics):
        classify_longtime(traj)


def test_decay_below_threshold_is_converged(one_sided):
    traj = integrate(one_sided.replace(x=0.5), t_end=60.0)
    assert classify_longtime(traj).verdict is Dynamics.CONVERGED


@pytest.mark.slow
def test_delay_induced_oscillation(fig9_params):
    stable = classify_longtime(integrate(fig9_params.replace(x=0.745), t_end=600.0))
    assert stable.verdict is Dynamics.CONVERGED
    unstable = classify_longtime(integrate(fig9_params.replace(x=0.78), t_end=600.0))
    assert unstable.verdict is Dynamics.OSCILLATING
    assert unstable.period == pytest.approx(2 * np.pi / 0.9755, rel=2e-2)


def test_random_steady_states_are_stationary():
    rng = np.random.default_rng(0)
    above = 0
    for _ in range(200):
        q = ClassicalParams(kappa_b=rng.uniform(0.1, 1.0), kappa_c=rng.uniform(0.0, 1.0),
                            loss=rng.uniform(0.0, 1.0), phi=rng.uniform(-np.pi, np.pi),
                            delta=rng.uniform(-1.0, 1.0), tau=rng.uniform(0.0, 5.0),
                            kappa_p=rng.uniform(0.2, 3.0), x=rng.uniform(0.0, 5.0))
        states = steady_states(q)
        above += len(states) == 3
        for ss in states:
            assert steady_state_residual(q, ss) < 1e-12
    assert above > 50


def test_fast_pump_recovers_undepleted_roots(fig9_params):
    q = fig9_params.replace(tau=1.5, x=0.6, kappa_p=100.0)
    trivial = steady_states(q)[0]
    frozen = linearize_at(q, trivial, pump_depletion=False)
    depleted = linearize_at(q, trivial)
    expected = frozen.roots()
    found = depleted.roots(frozen.region())
    n = min(4, expected.size)
    assert n > 0
    np.testing.assert_allclose(found[:n], expected[:n], atol=1e-2)


@pytest.mark.slow
def test_linear_stability_predicts_long_time_behaviour(fig9_params):
    checked = 0
    for tau in (2.0, 2.4184, 3.0, 3.5, 4.0):
        for x in (0.1, 0.25, 0.4, 0.55, 0.7, 0.85):
            q = fig9_params.replace(tau=tau, x=x)
            rate = linearize_at(q, steady_states(q)[0]).max_real_part()
            if abs(rate) < 0.02:
                continue
            verdict = classify_longtime(integrate(q, (0.01, x), t_end=400.0), kappa=q.kappa).verdict
            assert (verdict is Dynamics.CONVERGED) == (rate < 0.0), (tau, x, rate, verdict)
            checked += 1
    assert checked >= 20
