import numpy as np
import pytest

from figures import FIGURES, run_figure
from shared.errors import ConfigError
from shared.utils import to_decibels
from spectrum_engine import resonance_variance_no_feedback


def test_unknown_figure_rejected(small_solver_config):
    with pytest.raises(ConfigError, match="fig6"):
        run_figure('fig6', small_solver_config)


def test_every_listed_figure_has_a_builder():
    expected = {f"fig{n}" for n in (2, 3, 4, 5, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17)}
    assert set(FIGURES) == expected


def test_floor_against_pump(small_solver_config):
    frame = run_figure('fig5', small_solver_config)[0].frame
    lossy = frame[(frame['series'] == 'feedback') & (frame['loss'] == 0.05)]
    row = lossy[np.isclose(lossy['eps'], 0.25)].iloc[0]
    assert row['floor_db'] == pytest.approx(-10.0, abs=1e-9)
    row = frame[(frame['loss'] == 0.1) & np.isclose(frame['eps'], 0.5)].iloc[0]
    assert row['floor_db'] == pytest.approx(-10.0, abs=1e-9)
    ref = frame[frame['series'] == 'one_sided']
    expected = [to_decibels(resonance_variance_no_feedback(1.0, e)) for e in ref['eps']]
    np.testing.assert_allclose(ref['floor_db'], expected)


def test_branches_appear_above_threshold(small_solver_config):
    frame = run_figure('fig7', small_solver_config)[0].frame
    thresholds = {'a': 1.0, 'b': 2.0, 'c': 1.5, 'd': 0.5}
    for panel, x_th in thresholds.items():
        rows = frame[frame['panel'] == panel]
        onset = rows.loc[rows['branch'] == 'upper', 'x'].min()
        assert x_th - 1e-6 < onset <= x_th + 0.05 + 1e-6
        below = rows[rows['x'] < x_th - 1e-6]
        assert set(below['branch']) == {'trivial'}


def test_delayed_branch_table_has_both_delays(small_solver_config):
    frame = run_figure('fig8', small_solver_config)[0].frame
    assert sorted(frame['tau'].unique()) == [0.6, 1.57]
    assert {'x', 'branch', 'stable'} <= set(frame.columns)


def test_detuned_optimum_table(small_solver_config):
    tables = run_figure('fig12', small_solver_config)
    assert [t.name for t in tables] == ['fig12', 'fig12_optimum']
    scan = tables[0].frame
    assert list(scan.columns) == ['delta', 'nu', 'tau', 'theta_d', 'variance', 'decibels']
    assert scan.groupby('delta')['nu'].nunique().eq(1).all()
    optimum = tables[1].frame
    assert optimum['delta'].tolist() == [0.0, 0.2, 0.4]
    np.testing.assert_allclose(optimum['theta_grid'], optimum['theta_formula'], atol=1e-3)
    assert (optimum['decibels'] < 0.0).all()


def test_phase_scans_are_labelled(small_solver_config):
    tables = run_figure('fig17', small_solver_config)
    assert [t.name for t in tables] == ['fig17_detuning', 'fig17_phase']
    assert tables[0].frame['delta'].nunique() == 3
    np.testing.assert_allclose(sorted(tables[1].frame['phi'].unique()), np.pi * np.array([0.9, 0.95, 1.0]))
    assert tables[1].metadata['nu'] == 0.0


def test_pyragas_squeezing_beats_reference_at_strong_pump(small_solver_config):
    frame = run_figure('fig16', small_solver_config)[0].frame
    feedback = frame[(frame['series'] == 'feedback') & (frame['loss'] == 0.02)]
    ref = frame[frame['series'] == 'one_sided']
    strong = feedback[np.isclose(feedback['eps'], 0.45)]['floor_db'].iloc[0]
    assert strong < ref[np.isclose(ref['eps'], 0.45)]['floor_db'].iloc[0]
