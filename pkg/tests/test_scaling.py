import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scorecast.dataset import ScoreMatrix
from scorecast.errors import CoverageError, DegenerateDataError, DomainError, FitError
from scorecast.scaling import (
    B_BOUNDS,
    W_BOUNDS,
    ScalingCurve,
    fit_curve,
    fit_family_task_curves,
    predict_curve,
    scaling_predict_for_model,
    sigmoid,
)
from conftest import make_model_record


def curve_points(w, b, cs):
    """Forward-generate noiseless points from sigmoid(w*ln C + b)."""
    return [(c, float(sigmoid(w * math.log(c) + b))) for c in cs]


class TestFitCurve:
    def test_noiseless_recovery(self):
        pts = curve_points(1.2, -6.0, [1e3, 7e3, 1.3e4, 7e4])
        curve = fit_curve(pts)
        assert abs(curve.w - 1.2) <= 1e-3
        assert abs(curve.b - (-6.0)) <= 1e-2

    def test_two_points_minimum(self):
        with pytest.raises(FitError):
            fit_curve([(1e3, 0.5)])

    def test_identical_compute_is_degenerate(self):
        with pytest.raises(DegenerateDataError):
            fit_curve([(1e3, 0.4), (1e3, 0.6)])

    def test_nonpositive_compute(self):
        with pytest.raises(DomainError):
            fit_curve([(0.0, 0.4), (1e3, 0.6)])

    def test_clamps_at_upper_w_bound(self):
        # steep curve, points kept shy of the score clip so the unconstrained
        # optimum is exactly w=3; the boxed fit must return the bound
        pts = curve_points(3.0, -6.0, [math.e, math.e ** 2, math.e ** 3])
        curve = fit_curve(pts)
        assert curve.w == pytest.approx(W_BOUNDS[1], abs=1e-9)
        assert B_BOUNDS[0] <= curve.b <= B_BOUNDS[1]

    def test_boxed_solution_matches_scipy_oracle(self):
        from scipy.optimize import lsq_linear

        rng = np.random.default_rng(4)
        for _ in range(25):
            w_true = rng.uniform(0.1, 3.5)
            b_true = rng.uniform(-12.0, -1.0)
            cs = np.exp(rng.uniform(4, 13, size=5))
            pts = [(c, float(np.clip(sigmoid(w_true * math.log(c) + b_true)
                                     + rng.normal(0, 0.02), 1e-4, 1 - 1e-4)))
                   for c in cs]
            curve = fit_curve(pts)
            x = np.log([c for c, _ in pts])
            y = np.log([s / (1 - s) for _, s in pts])
            A = np.column_stack([x, np.ones_like(x)])
            ref = lsq_linear(A, y, bounds=([W_BOUNDS[0], B_BOUNDS[0]],
                                           [W_BOUNDS[1], B_BOUNDS[1]]))
            assert curve.w == pytest.approx(ref.x[0], abs=1e-6)
            assert curve.b == pytest.approx(ref.x[1], abs=1e-6)

    @settings(max_examples=40, deadline=None)
    @given(w=st.floats(0.6, 1.9), b=st.floats(-9.5, -3.5))
    def test_in_box_parameters_recovered(self, w, b):
        # sample compute values whose scores stay inside the clip range, so
        # the noiseless points carry full information about (w, b)
        lo, hi = (-8.5 - b) / w, (8.5 - b) / w
        cs = [math.exp(lo + t * (hi - lo)) for t in (0.1, 0.4, 0.7, 0.95)]
        curve = fit_curve(curve_points(w, b, cs))
        assert abs(curve.w - w) <= 1e-3
        assert abs(curve.b - b) <= 1e-2
        assert W_BOUNDS[0] <= curve.w <= W_BOUNDS[1]
        assert B_BOUNDS[0] <= curve.b <= B_BOUNDS[1]


class TestPredictCurve:
    def test_analytic_midpoint(self):
        curve = ScalingCurve(w=1.0, b=-3.0)
        assert predict_curve(curve, math.e ** 3) == pytest.approx(0.5)

    def test_fitted_curve_evaluates_analytically(self):
        curve = fit_curve(curve_points(1.2, -6.0, [1e3, 7e3, 1.3e4, 7e4]))
        want = float(sigmoid(1.2 * math.log(7e4) - 6.0))
        assert predict_curve(curve, 7e4) == pytest.approx(want, abs=1e-3)

    def test_monotone_in_compute(self):
        curve = ScalingCurve(w=0.7, b=-5.0)
        values = [predict_curve(curve, c) for c in np.geomspace(10, 1e6, 40)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_domain_error(self):
        with pytest.raises(DomainError):
            predict_curve(ScalingCurve(w=1.0, b=-4.0), 0.0)


def family_fixture(w=1.1, b=-6.5, params=(7000.0, 13000.0, 34000.0, 70000.0)):
    """Synthetic family whose scores on one task follow a known curve."""
    names = tuple(f"F-{int(p)}" for p in params)
    records = {name: make_model_record(name, family="F", params_m=p)
               for name, p in zip(names, params)}
    entries = tuple((u, 0, float(sigmoid(w * math.log(p) + b)), "")
                    for u, p in enumerate(params))
    matrix = ScoreMatrix(names, ("T0",), entries)
    return matrix, records, names


class TestScalingPredictForModel:
    def test_synthetic_family_recovery(self):
        w, b = 1.1, -6.5
        matrix, records, names = family_fixture(w, b)
        target = records[names[-1]]
        train = matrix.with_entries([e for e in matrix.entries if e[0] != 3])
        pred, curve = scaling_predict_for_model(target, train, 0, records)
        want = float(sigmoid(w * math.log(target.params_m) + b))
        assert pred == pytest.approx(want, abs=1e-3)
        assert curve.n_points == 3
        assert curve.family == "F"

    def test_single_smaller_model_is_coverage_error(self):
        matrix, records, names = family_fixture(params=(7000.0, 70000.0))
        target = records[names[-1]]
        train = matrix.with_entries([matrix.entries[0]])
        with pytest.raises(CoverageError):
            scaling_predict_for_model(target, train, 0, records)

    def test_only_smaller_models_used(self):
        matrix, records, names = family_fixture()
        target = records[names[1]]  # 13B: only the 7B model is smaller
        with pytest.raises(CoverageError):
            scaling_predict_for_model(target, matrix, 0, records)

    def test_family_report(self):
        matrix, records, _ = family_fixture()
        curves = fit_family_task_curves(matrix, records)
        assert len(curves) == 1
        assert curves[0].task == "T0"
        assert curves[0].n_points == 4
        assert curves[0].residual < 1e-12
