from __future__ import annotations

import csv

import pytest

from simplexsearch.errors import InvalidStage, ThresholdNotMetAtCenter, UnknownTable
from simplexsearch.sweep import (
    SweepSpec,
    analyze,
    epsilon_tolerance,
    final_success,
    reproduce,
    stage_peak_function,
    success_vs_m,
    tolerance_for,
)


@pytest.mark.parametrize(
    "kwargs",
    [dict(epsilon_grid=(0.0, 201)), dict(epsilon_grid=(1.0, 201)), dict(epsilon_grid=(0.5, 8)), dict(threshold=1.0), dict(threshold=0.0)],
)
def test_sweep_spec_validation(kwargs):
    with pytest.raises(InvalidStage):
        SweepSpec("single_mark_r2", 1, (100,), **kwargs)


@pytest.mark.parametrize("stage", [1, 2, 3])
def test_interval_contains_the_critical_rate(stage):
    iv = tolerance_for(analyze("single_mark_r2", 1000), SweepSpec("single_mark_r2", stage, (1000,)))
    assert iv.eps_lo < 0 < iv.eps_hi
    assert not iv.clipped
    assert iv.relative_halfwidth == pytest.approx(100 * 0.5 * (iv.eps_hi - iv.eps_lo) / iv.gamma_c)
    assert iv.gamma_lo < iv.gamma_c < iv.gamma_hi


def test_interval_edges_straddle_threshold():
    an = analyze("single_mark_r2", 100)
    spec = SweepSpec("single_mark_r2", 1, (100,))
    iv = tolerance_for(an, spec)
    p = stage_peak_function(an, 1)
    step = 0.01 * iv.gamma_c * 0.5 / 100
    for edge, outward in ((iv.eps_lo, -1), (iv.eps_hi, 1)):
        assert p(edge) >= 0.5
        assert p(edge + outward * 2 * step) < 0.5


def test_denser_epsilon_grid_agrees():
    an = analyze("single_mark_r2", 1000)
    a = tolerance_for(an, SweepSpec("single_mark_r2", 2, (1000,), epsilon_grid=(0.5, 201)))
    b = tolerance_for(an, SweepSpec("single_mark_r2", 2, (1000,), epsilon_grid=(0.5, 401)))
    assert b.relative_halfwidth == pytest.approx(a.relative_halfwidth, rel=0.05)


def test_unreachable_threshold():
    with pytest.raises(ThresholdNotMetAtCenter):
        tolerance_for(analyze("single_mark_r2", 100), SweepSpec("single_mark_r2", 2, (100,), threshold=0.999))


def test_tolerance_over_several_m_with_threads():
    spec = SweepSpec("single_mark_r2", 1, (100, 1000))
    serial = epsilon_tolerance(spec)
    threaded = epsilon_tolerance(spec, jobs=2)
    assert [iv.dim for iv in threaded] == [100, 1000]
    assert [iv.eps_lo for iv in serial] == [iv.eps_lo for iv in threaded]


def test_success_helpers():
    [(m, p)] = success_vs_m("single_mark_r2", [100])
    assert m == 100 and p == pytest.approx(final_success(analyze("single_mark_r2", 100)))
    assert 0.9 < p < 1.0


def read_summary(path):
    rows = [r for r in path.read_text().splitlines() if not r.startswith("#")]
    return list(csv.DictReader(rows))


def test_reproduce_first_stage_curve(tmp_path):
    rep = reproduce("fig4", tmp_path)
    assert rep.passed
    summary = read_summary(tmp_path / "fig4" / "summary.csv")
    assert list(summary[0]) == ["row", "quantity", "computed", "published", "tolerance", "pass"]
    assert (tmp_path / "fig4" / "stage1.csv").read_text().startswith("# generated-by simplexsearch")


def test_reproduce_subspace_table(tmp_path):
    rep = reproduce("table5", tmp_path, jobs=2)
    dims = {r[0]: r[2] for r in rep.summary if r[1] == "subspace_dimension"}
    assert dims == {"a": 47, "b": 47, "c": 27, "d": 11, "e": 47}
    assert rep.passed
    assert len(rep.files) == 6


def test_unknown_table(tmp_path):
    with pytest.raises(UnknownTable):
        reproduce("table9", tmp_path)


def test_schedule_requires_sequential_scenario():
    an = analyze("fig11_three_marks", 100, two_level=False)
    with pytest.raises(InvalidStage):
        an.schedule()
