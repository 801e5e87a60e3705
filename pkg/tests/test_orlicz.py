"""Tests for torus functions, quadrature grids, and Orlicz/Lebesgue norms."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from ciflab.errors import InvalidFunctionError, InvalidParameterError, UnsupportedDimensionError
from ciflab.orlicz import (
    QuadratureGrid,
    TorusFunction,
    lebesgue_norm,
    membership_report,
    orlicz2_norm,
    orlicz_norm,
    quadrature_integral,
    young_M,
)

TWO_PI = 2.0 * math.pi


def unit_measure_grid(res=512):
    return QuadratureGrid.uniform(1, res, total_measure=1.0)


# ---------------------------------------------------------------------------
# root-find oracles for the Luxemburg gauge of the constant function


def test_orlicz_constant_measure_one():
    # lambda solves (1/lam) * log(e + 1/lam) = 1; independent scalar root-find
    oracle = 1.0 / brentq(lambda u: u * math.log(math.e + u) - 1.0, 1e-8, 10.0, xtol=1e-14)
    f = TorusFunction.constant(1.0, d=1)
    got = orlicz_norm(f, unit_measure_grid())
    assert got == pytest.approx(oracle, abs=1e-6)
    assert got == pytest.approx(1.2568, abs=1e-4)


def test_orlicz_constant_full_circle():
    # measure 2*pi: lambda solves M(1/lam) = 1/(2*pi)
    oracle = 1.0 / brentq(
        lambda u: u * math.log(math.e + u) - 1.0 / TWO_PI, 1e-8, 10.0, xtol=1e-14
    )
    f = TorusFunction.constant(1.0, d=1)
    got = orlicz_norm(f, QuadratureGrid.uniform(1, 512))
    assert got == pytest.approx(oracle, rel=1e-8)
    assert got == pytest.approx(6.62, abs=5e-3)


def test_orlicz_zero_function():
    f = TorusFunction.constant(0.0, d=1)
    assert orlicz_norm(f, QuadratureGrid.uniform(1, 64)) == 0.0
    assert orlicz2_norm(f, QuadratureGrid.uniform(1, 64)) == 0.0


def test_orlicz2_constant_full_circle():
    f = TorusFunction.constant(1.0, d=1)
    grid = QuadratureGrid.uniform(1, 512)
    got = orlicz2_norm(f, grid)
    assert got == pytest.approx(math.sqrt(orlicz_norm(f, grid)), rel=1e-10)
    assert got == pytest.approx(2.573, abs=5e-3)


def test_orlicz_constraint_saturation():
    for f in (
        TorusFunction.shifted_cosine(2.0, d=1),
        TorusFunction.radial_logspike(cap=1e6, d=2),
    ):
        grid = QuadratureGrid.uniform(f.d, 256)
        lam = orlicz_norm(f, grid)
        vals, w = grid.weighted_samples(f)
        constraint = float(np.sum(w * young_M(np.abs(vals) / lam)))
        assert abs(constraint - 1.0) <= 1e-8


def test_orlicz_homogeneity():
    f = TorusFunction.shifted_cosine(2.0, d=1)
    grid = QuadratureGrid.uniform(1, 256)
    base = orlicz_norm(f, grid)
    base2 = orlicz2_norm(f, grid)
    for c in (0.5, 3.0, 17.0):
        assert orlicz_norm(f.scaled(c), grid) == pytest.approx(c * base, rel=1e-8)
        assert orlicz2_norm(f.scaled(c), grid) == pytest.approx(c * base2, rel=1e-8)


def test_orlicz_monotone_in_absolute_value():
    # |cos x| <= 2 + cos x everywhere
    small = TorusFunction.cosine_mode((1,))
    big = TorusFunction.shifted_cosine(2.0, d=1)
    grid = QuadratureGrid.uniform(1, 256)
    assert orlicz_norm(small, grid) <= orlicz_norm(big, grid) + 1e-10


def test_orlicz_grid_stability_smooth():
    f = TorusFunction.shifted_cosine(2.0, d=1)
    a = orlicz_norm(f, QuadratureGrid.uniform(1, 256))
    b = orlicz_norm(f, QuadratureGrid.uniform(1, 512))
    assert abs(b - a) < 1e-6 * a


def test_orlicz2_consistency_with_squared_function():
    f = TorusFunction.shifted_cosine(2.0, d=1)
    grid = QuadratureGrid.uniform(1, 128)
    assert orlicz2_norm(f, grid) == math.sqrt(orlicz_norm(f.abs_squared(), grid))


# ---------------------------------------------------------------------------
# Lebesgue norms


def test_lebesgue_constant():
    f = TorusFunction.constant(1.0, d=1)
    got = lebesgue_norm(f, QuadratureGrid.uniform(1, 256), 2.0)
    assert got == pytest.approx(math.sqrt(TWO_PI), rel=1e-12)


def test_lebesgue_cosine():
    f = TorusFunction.cosine_mode((1,))
    got = lebesgue_norm(f, QuadratureGrid.uniform(1, 256), 2.0)
    assert got == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_lebesgue_zero():
    f = TorusFunction.constant(0.0, d=2)
    assert lebesgue_norm(f, QuadratureGrid.uniform(2, 64), 2.0) == 0.0


def test_lebesgue_rejects_bad_p():
    f = TorusFunction.constant(1.0, d=1)
    grid = QuadratureGrid.uniform(1, 64)
    for p in (0.5, 0.0, -2.0, math.inf, math.nan):
        with pytest.raises(InvalidParameterError):
            lebesgue_norm(f, grid, p)


# ---------------------------------------------------------------------------
# families and sampling


def test_constant_sample_shape():
    f = TorusFunction.constant(3.0, d=2)
    s = f.sample(16)
    assert s.shape == (16, 16)
    assert np.all(s == 3.0)


def test_cosine_mode_values():
    f = TorusFunction.cosine_mode((1, 0))
    pts = np.array([[0.3, 1.7], [-1.1, 0.0]])
    np.testing.assert_allclose(f.evaluate(pts), np.cos(pts[:, 0]), rtol=1e-15)


def test_cosine_mode_dimension_mismatch():
    with pytest.raises(InvalidParameterError):
        TorusFunction.cosine_mode((1, 0), d=3)


def test_shifted_cosine_integral():
    f = TorusFunction.shifted_cosine(2.0, d=1)
    assert f.exact_integral == pytest.approx(2.0 * TWO_PI, rel=1e-15)
    got = quadrature_integral(f, QuadratureGrid.uniform(1, 256))
    assert got == pytest.approx(f.exact_integral, rel=1e-6)


def test_box_indicator_values_and_volume():
    f = TorusFunction.box_indicator([(-1.0, 2.0)], d=1)
    pts = np.array([[-1.5], [0.0], [2.0], [2.5]])
    np.testing.assert_array_equal(f.evaluate(pts), [0.0, 1.0, 1.0, 0.0])
    assert f.exact_integral == pytest.approx(3.0)


def test_box_indicator_default_is_half_domain():
    f = TorusFunction.box_indicator(d=1)
    assert f.params["bounds"] == [(-math.pi / 2.0, math.pi / 2.0)]
    assert f.exact_integral == pytest.approx(math.pi)


def test_box_indicator_rejects_bad_bounds():
    with pytest.raises(InvalidParameterError):
        TorusFunction.box_indicator([(1.0, 1.0)], d=1)
    with pytest.raises(InvalidParameterError):
        TorusFunction.box_indicator([(-4.0, 0.0)], d=1)


def test_smooth_families_match_exact_integral():
    cases = [
        TorusFunction.constant(1.5, d=2),
        TorusFunction.shifted_cosine(2.0, d=1),
        TorusFunction.box_indicator(d=2),
    ]
    for f in cases:
        got = quadrature_integral(f, QuadratureGrid.uniform(f.d, 256))
        assert got == pytest.approx(f.exact_integral, rel=1e-6)
    f = TorusFunction.cosine_mode((1, 0))
    assert abs(quadrature_integral(f, QuadratureGrid.uniform(2, 256))) < 1e-10


def test_spike_exact_integral_value():
    f = TorusFunction.radial_logspike(cap=1e6, d=2)
    expected = 8.0 * math.pi * math.log(1.0 + math.sqrt(2.0)) - math.pi / 1e6
    assert f.exact_integral == pytest.approx(expected, rel=1e-15)


def test_spike_integral_on_refined_grid():
    f = TorusFunction.radial_logspike(cap=1e6, d=2)
    grid = QuadratureGrid.refined_radial(1024)
    got = quadrature_integral(f, grid)
    assert got == pytest.approx(f.exact_integral, rel=1e-2)


def test_spike_cap_applies_at_origin():
    f = TorusFunction.radial_logspike(cap=100.0, d=2)
    vals = f.evaluate(np.array([[0.0, 0.0], [1e-9, 0.0], [1.0, 0.0]]))
    assert vals[0] == 100.0 and vals[1] == 100.0
    assert vals[2] == pytest.approx(1.0)


def test_custom_grid_callable():
    f = TorusFunction.custom_grid(lambda x: np.exp(1j * x), d=1, is_real=False)
    pts = np.array([[0.0], [math.pi / 2.0]])
    np.testing.assert_allclose(f.evaluate(pts), [1.0, 1j], atol=1e-15)


def test_custom_grid_non_finite_rejected():
    f = TorusFunction.custom_grid(lambda x: 1.0 / np.sin(x / 2.0 + x * 0.0) * 0.0 + np.full_like(x, np.inf), d=1)
    with pytest.raises(InvalidFunctionError):
        orlicz_norm(f, QuadratureGrid.uniform(1, 64))


def test_dimension_validation():
    with pytest.raises(UnsupportedDimensionError):
        TorusFunction.constant(1.0, d=4)
    with pytest.raises(UnsupportedDimensionError):
        QuadratureGrid.uniform(0, 64)


def test_evaluate_dimension_mismatch():
    f = TorusFunction.constant(1.0, d=2)
    with pytest.raises(InvalidParameterError):
        f.evaluate(np.zeros((3, 3)))
    with pytest.raises(InvalidParameterError):
        QuadratureGrid.uniform(1, 64).weighted_samples(f)


# ---------------------------------------------------------------------------
# quadrature grids


def test_uniform_weights_sum():
    for d in (1, 2, 3):
        grid = QuadratureGrid.uniform(d, 32)
        assert grid.weights_sum() == pytest.approx(TWO_PI**d, rel=1e-12)


def test_uniform_measure_override():
    grid = QuadratureGrid.uniform(1, 128, total_measure=1.0)
    vals, w = grid.weighted_samples(TorusFunction.constant(1.0, d=1))
    assert np.sum(w) == pytest.approx(1.0, rel=1e-12)
    assert vals.size == 128


def test_refined_radial_weights_sum():
    grid = QuadratureGrid.refined_radial(256)
    assert grid.weights_sum() == pytest.approx(TWO_PI**2, rel=1e-12)


def test_refined_radial_matches_uniform_on_smooth():
    f = TorusFunction.shifted_cosine(2.0, d=2, mode=(1, 0))
    a = quadrature_integral(f, QuadratureGrid.uniform(2, 256))
    b = quadrature_integral(f, QuadratureGrid.refined_radial(256))
    assert b == pytest.approx(a, rel=1e-6)


def test_refined_radial_parameter_validation():
    with pytest.raises(InvalidParameterError):
        QuadratureGrid.refined_radial(255)
    with pytest.raises(InvalidParameterError):
        QuadratureGrid.refined_radial(256, ring_res=30)
    with pytest.raises(InvalidParameterError):
        QuadratureGrid.refined_radial(256, block_cells=0)


def test_midpoint_nodes_avoid_origin():
    f = TorusFunction.radial_logspike(cap=1e12, d=2)
    vals, _ = QuadratureGrid.uniform(2, 128).weighted_samples(f)
    # no node sits at the origin, so the cap is never the sampled maximum
    assert vals.max() < 1e12


# ---------------------------------------------------------------------------
# membership ladder


def test_membership_constant_d2():
    rep = membership_report(TorusFunction.constant(1.0, d=2), ladder=(64, 128, 256, 512))
    assert rep["in_L2"] is True
    assert rep["in_LM"] is True
    assert rep["verdict_l2"]["converging"] is True


def test_membership_box_quadrant_d2():
    f = TorusFunction.box_indicator([(0.0, math.pi), (0.0, math.pi)], d=2)
    rep = membership_report(f, ladder=(64, 128, 256, 512))
    assert rep["in_L2"] is True
    assert rep["in_LM"] is True


def test_membership_spike_contrast():
    f = TorusFunction.radial_logspike(cap=1e6, d=2)
    rep = membership_report(f)
    assert rep["in_L2"] is False
    assert rep["verdict_l2"]["diverging"] is True
    assert rep["in_LM"] is True
    assert rep["verdict_lm"]["converging"] is True
    assert rep["params"]["cap"] == 1e6
    assert [row["res"] for row in rep["ladder"]] == [128, 256, 512, 1024]


def test_membership_ladder_validation():
    with pytest.raises(InvalidParameterError):
        membership_report(TorusFunction.constant(1.0, d=1), ladder=(64, 128))
