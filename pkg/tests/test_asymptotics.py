"""Tests for the limit-check reports: targets, trims, extrapolation, probes."""

import json
import math

import numpy as np
import pytest

from ciflab.asymptotics import (
    DEFAULT_TOLERANCES,
    cif_check,
    cwikel_probe,
    l2_blowup_probe,
    weyl_constant,
)
from ciflab.errors import (
    ContractViolationError,
    InvalidFunctionError,
    InvalidParameterError,
    UnsupportedDimensionError,
)
from ciflab.orlicz import TorusFunction

SMALL = (16.0, 24.0, 32.0)


# ---------------------------------------------------------------------------
# weyl_constant


def test_weyl_constant_closed_forms():
    assert weyl_constant(1) == pytest.approx(1.0 / math.pi, rel=1e-15)
    assert weyl_constant(2) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-15)
    assert weyl_constant(3) == pytest.approx(1.0 / (6.0 * math.pi**2), rel=1e-15)


def test_weyl_constant_rejects_other_dimensions():
    for d in (0, 4, -1):
        with pytest.raises(UnsupportedDimensionError):
            weyl_constant(d)


# ---------------------------------------------------------------------------
# diagonal fast path


def test_fast_path_constant_hits_target():
    report = cif_check(TorusFunction.constant(1.0), 1, (1e4, 1e5, 1e6))
    assert report.fast_diagonal
    assert report.target_pos == pytest.approx(2.0, rel=1e-12)
    assert report.target_neg == 0.0
    assert report.extrapolated_pos == pytest.approx(2.0, rel=0.01)
    assert report.extrapolated_neg == 0.0
    assert report.passed
    assert report.tolerance == DEFAULT_TOLERANCES["diagonal"]


def test_fast_path_negative_constant_swaps_parts():
    report = cif_check(TorusFunction.constant(-3.0), 1, (1e3, 1e4, 1e5))
    assert report.target_pos == 0.0
    assert report.target_neg == pytest.approx(6.0, rel=1e-12)
    assert report.extrapolated_pos == 0.0
    assert report.extrapolated_neg == pytest.approx(6.0, rel=0.01)


def test_matrix_route_agrees_with_diagonal_route():
    # the multiplication table of a constant is a delta, so the assembled
    # matrix is exactly the diagonal the fast path enumerates
    fast = cif_check(TorusFunction.constant(1.0), 1, SMALL)
    slow = cif_check(TorusFunction.constant(1.0), 1, SMALL, fast_diagonal=False)
    assert fast.fast_diagonal and not slow.fast_diagonal
    assert slow.target_pos == fast.target_pos
    for rf, rs in zip(fast.rungs, slow.rungs):
        assert rs.dim == rf.dim
        assert rs.est_pos.alpha_hat == pytest.approx(rf.est_pos.alpha_hat, rel=1e-12)
    assert slow.extrapolated_pos == pytest.approx(fast.extrapolated_pos, rel=1e-12)


def test_dixmier_cross_check_tracks_the_limit():
    report = cif_check(TorusFunction.constant(1.0), 1, (1e3, 1e4, 1e5))
    assert report.dixmier["pos"] == pytest.approx(2.0, rel=5e-3)
    assert report.dixmier["neg"] is None
    assert "verdict" in report.dixmier["role"]


# ---------------------------------------------------------------------------
# validation


def test_dimension_mismatch_rejected():
    f = TorusFunction.constant(1.0, d=2)
    with pytest.raises(InvalidParameterError):
        cif_check(f, 1, SMALL)


def test_complex_function_rejected():
    f = TorusFunction.custom_grid(lambda x: np.exp(1j * x), d=1, is_real=False)
    with pytest.raises(ContractViolationError):
        cif_check(f, 1, SMALL)


def test_schedule_validation():
    f = TorusFunction.constant(1.0)
    for bad in [(), (8.0, 12.0), (8.0, 8.0, 12.0), (12.0, 8.0, 16.0), (0.0, 8.0, 12.0)]:
        with pytest.raises(InvalidParameterError):
            cif_check(f, 1, bad)


def test_tolerance_must_be_positive():
    with pytest.raises(InvalidParameterError):
        cif_check(TorusFunction.constant(1.0), 1, SMALL, tolerance=0.0)


def test_fast_diagonal_flag_limited_to_constants():
    with pytest.raises(InvalidParameterError):
        cif_check(TorusFunction.shifted_cosine(2.0), 1, SMALL, fast_diagonal=True)


# ---------------------------------------------------------------------------
# linearity and sign symmetry


def test_targets_scale_linearly():
    f = TorusFunction.shifted_cosine(0.5)
    base = cif_check(f, 1, SMALL)
    tripled = cif_check(f.scaled(3.0), 1, SMALL)
    assert tripled.target_pos == pytest.approx(3.0 * base.target_pos, rel=1e-12)
    assert tripled.target_neg == pytest.approx(3.0 * base.target_neg, rel=1e-12)


def test_sign_swap_is_bitwise():
    f = TorusFunction.shifted_cosine(0.5)
    plus = cif_check(f, 1, SMALL)
    minus = cif_check(f.scaled(-1.0), 1, SMALL)
    assert minus.extrapolated_pos == plus.extrapolated_neg
    assert minus.extrapolated_neg == plus.extrapolated_pos
    assert minus.target_pos == plus.target_neg
    assert minus.target_neg == plus.target_pos
    for rp, rm in zip(plus.rungs, minus.rungs):
        assert np.array_equal(rm.seq_pos.values, rp.seq_neg.values)
        assert np.array_equal(rm.seq_neg.values, rp.seq_pos.values)


# ---------------------------------------------------------------------------
# report schema


def test_report_dict_and_json_schema():
    report = cif_check(TorusFunction.constant(1.0), 1, (1e3, 1e4, 1e5))
    data = report.as_dict()
    assert set(data) == {
        "f", "d", "schedule", "rungs", "targets", "extrapolated",
        "tolerances", "verdicts", "stability", "dixmier",
        "fast_diagonal", "conventions",
    }
    assert data["f"]["family"] == "constant"
    for rung in data["rungs"]:
        assert set(rung) == {
            "R", "dim", "keep_pos", "keep_neg", "est_pos", "est_neg", "residuals",
        }
    assert set(data["stability"]) == {"pos", "neg"}
    assert data["stability"]["pos"]["ok"]
    assert 0.0 <= data["stability"]["pos"]["delta"] <= 0.10

    parsed = json.loads(report.to_json())
    assert parsed["verdicts"]["passed"] is True
    assert report.to_json() == report.to_json()


def test_rung_dims_match_lattice_sizes():
    report = cif_check(TorusFunction.constant(1.0), 1, SMALL)
    assert [r.dim for r in report.rungs] == [33, 49, 65]


# ---------------------------------------------------------------------------
# cwikel probe


def test_cwikel_probe_constant_ratio_is_flat():
    probe = cwikel_probe(TorusFunction.constant(1.0), 1, (64, 128, 256))
    ratios = [row["ratio"] for row in probe["rows"]]
    for r in ratios:
        assert r == pytest.approx(0.581059, abs=1e-4)
    assert probe["denominator"] == pytest.approx(2.573490, abs=1e-4)


def test_cwikel_probe_scaling_invariance():
    f = TorusFunction.shifted_cosine(2.0)
    base = cwikel_probe(f, 1, SMALL)
    scaled = cwikel_probe(f.scaled(7.0), 1, SMALL)
    assert scaled["denominator"] == pytest.approx(7.0 * base["denominator"], rel=1e-8)
    for a, b in zip(base["rows"], scaled["rows"]):
        assert b["ratio"] == pytest.approx(a["ratio"], rel=1e-8)


def test_cwikel_probe_row_schema():
    probe = cwikel_probe(TorusFunction.box_indicator(d=1), 1, SMALL)
    assert set(probe) == {"f", "d", "denominator", "norm_convention", "rows"}
    dims = [row["dim"] for row in probe["rows"]]
    assert dims == sorted(dims) and len(set(dims)) == len(dims)
    for row in probe["rows"]:
        assert set(row) == {"R", "dim", "quasinorm", "ratio"}
        assert row["ratio"] > 0.0


def test_cwikel_probe_rejects_zero_function():
    with pytest.raises(InvalidFunctionError):
        cwikel_probe(TorusFunction.constant(0.0), 1, SMALL)


def test_cwikel_probe_rejects_bad_schedules():
    f = TorusFunction.constant(1.0)
    for bad in [(), (8.0, 8.0), (12.0, 8.0), (-1.0, 8.0)]:
        with pytest.raises(InvalidParameterError):
            cwikel_probe(f, 1, bad)
    with pytest.raises(InvalidParameterError):
        cwikel_probe(TorusFunction.constant(1.0, d=2), 1, SMALL)


# ---------------------------------------------------------------------------
# blow-up probe


def test_blowup_probe_rejects_other_dimensions():
    for d in (1, 3):
        with pytest.raises(UnsupportedDimensionError):
            l2_blowup_probe(d)


def test_blowup_probe_smoke():
    # short ladder: checks structure and the divergence/control contrast,
    # not the headline growth thresholds (those need the default schedule)
    rep = l2_blowup_probe(2, 1e6, (12, 16, 20))
    assert set(rep) == {
        "cap", "schedule", "rows", "strictly_increasing", "growth_per_rung",
        "blowup_ok", "control_rows", "control_converging", "symmetric",
        "symmetric_ok",
    }
    assert rep["strictly_increasing"]
    assert rep["control_converging"]
    assert all(g > 0.0 for g in rep["growth_per_rung"])
    ctrl = [abs(row["growth"]) for row in rep["control_rows"][1:]]
    assert max(ctrl) < min(rep["growth_per_rung"])
    assert rep["symmetric"]["extrapolated"]["neg"] == 0.0
