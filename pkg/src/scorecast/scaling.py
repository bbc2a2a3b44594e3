"""Sigmoidal scaling curves fitted per (model family, task).

A curve maps a model's parameter count C to a score via
sigmoid(w * ln(C) + b). Fitting happens in logit space, where the problem
is a 2-parameter linear least squares with box bounds on (w, b): the
unconstrained closed-form solution is used when it lies inside the box,
otherwise the boxed optimum is located by coordinate-wise golden-section
refinement (exact for this convex objective).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import ModelRecord, ScoreMatrix
from .errors import CoverageError, DegenerateDataError, DomainError, FitError

W_BOUNDS = (0.5, 2.0)
B_BOUNDS = (-10.0, -3.0)
SCORE_CLIP = 1e-4

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScalingCurve:
    w: float
    b: float
    family: str = ""
    task: str = ""
    residual: float = 0.0
    n_points: int = 0

    def __post_init__(self):
        if not (W_BOUNDS[0] <= self.w <= W_BOUNDS[1]):
            raise DomainError(f"coefficient w={self.w} outside {W_BOUNDS}")
        if not (B_BOUNDS[0] <= self.b <= B_BOUNDS[1]):
            raise DomainError(f"bias b={self.b} outside {B_BOUNDS}")


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def logit(s):
    s = np.asarray(s, dtype=np.float64)
    return np.log(s / (1.0 - s))


def _golden_min(f, lo: float, hi: float, tol: float = 1e-13) -> float:
    """Golden-section minimizer of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_curve(points, w_bounds=W_BOUNDS, b_bounds=B_BOUNDS) -> ScalingCurve:
    """Fit (w, b) minimizing sum((logit(S) - (w*ln C + b))^2) inside the box.

    points: iterable of (C, S) with C > 0 and S in (0, 1); S is clipped to
    [1e-4, 1 - 1e-4] before the logit transform.
    """
    pts = [(float(c), float(s)) for c, s in points]
    if len(pts) < 2:
        raise FitError(f"curve fit needs >= 2 points, got {len(pts)}")
    if any(c <= 0 for c, _ in pts):
        raise DomainError("parameter counts must be positive")
    x = np.log(np.array([c for c, _ in pts]))
    s = np.clip(np.array([s for _, s in pts]), SCORE_CLIP, 1.0 - SCORE_CLIP)
    y = logit(s)
    if np.ptp(x) < 1e-12:
        raise DegenerateDataError("all points share the same parameter count")

    def rss(w, b):
        r = y - (w * x + b)
        return float(r @ r)

    # closed-form unconstrained least squares
    xm, ym = x.mean(), y.mean()
    w0 = float(((x - xm) @ (y - ym)) / ((x - xm) @ (x - xm)))
    b0 = float(ym - w0 * xm)
    if w_bounds[0] <= w0 <= w_bounds[1] and b_bounds[0] <= b0 <= b_bounds[1]:
        w, b = w0, b0
    else:
        w = min(max(w0, w_bounds[0]), w_bounds[1])
        b = min(max(b0, b_bounds[0]), b_bounds[1])
        prev = rss(w, b)
        for _ in range(200):
            w = _golden_min(lambda t: rss(t, b), *w_bounds)
            b = _golden_min(lambda t: rss(w, t), *b_bounds)
            cur = rss(w, b)
            if prev - cur <= 1e-15 * max(1.0, prev):
                break
            prev = cur
    return ScalingCurve(w=w, b=b, residual=rss(w, b), n_points=len(pts))


def predict_curve(curve: ScalingCurve, C: float) -> float:
    """sigmoid(w * ln(C) + b); strictly increasing in C since w > 0."""
    if C <= 0:
        raise DomainError(f"parameter count must be > 0, got {C}")
    return float(sigmoid(curve.w * math.log(C) + curve.b))


def family_points(
    target: ModelRecord,
    train: ScoreMatrix,
    task_index: int,
    model_records: dict[str, ModelRecord],
) -> list[tuple[float, float]]:
    """(params, score) of same-family smaller models observed on this task."""
    if not target.is_present("family") or not target.is_present("params_m"):
        raise CoverageError(f"{target.identifier!r} lacks family or parameter count")
    pts = []
    for u, i, s, _ in train.entries:
        if i != task_index:
            continue
        rec = model_records.get(train.models[u])
        if rec is None or rec.identifier == target.identifier:
            continue
        if not rec.is_present("family") or rec.family != target.family:
            continue
        if not rec.is_present("params_m") or rec.params_m >= target.params_m:
            continue
        pts.append((rec.params_m, s))
    return pts


def scaling_predict_for_model(
    target: ModelRecord,
    train: ScoreMatrix,
    task_index: int,
    model_records: dict[str, ModelRecord],
) -> tuple[float, ScalingCurve]:
    """Fit the family curve from smaller in-family models and evaluate it
    at the target's parameter count."""
    pts = family_points(target, train, task_index, model_records)
    if len(pts) < 2:
        raise CoverageError(
            f"family {target.family!r} has {len(pts)} smaller model(s) with scores on "
            f"task {train.tasks[task_index]!r}; need >= 2"
        )
    try:
        curve = fit_curve(pts)
    except DegenerateDataError as exc:
        raise CoverageError(
            f"family {target.family!r} on task {train.tasks[task_index]!r}: {exc}"
        ) from exc
    curve = ScalingCurve(
        w=curve.w, b=curve.b, family=target.family,
        task=train.tasks[task_index], residual=curve.residual, n_points=curve.n_points,
    )
    return predict_curve(curve, target.params_m), curve


def fit_family_task_curves(
    train: ScoreMatrix, model_records: dict[str, ModelRecord]
) -> list[ScalingCurve]:
    """Curves for every (family, task) with >= 2 distinct-C observed points."""
    grouped: dict[tuple[str, int], list[tuple[float, float]]] = {}
    for u, i, s, _ in train.entries:
        rec = model_records.get(train.models[u])
        if rec is None or not rec.is_present("family") or not rec.is_present("params_m"):
            continue
        grouped.setdefault((rec.family, i), []).append((rec.params_m, s))
    out = []
    for (family, i), pts in sorted(grouped.items()):
        if len(pts) < 2 or len({c for c, _ in pts}) < 2:
            continue
        curve = fit_curve(pts)
        out.append(ScalingCurve(w=curve.w, b=curve.b, family=family,
                                task=train.tasks[i], residual=curve.residual,
                                n_points=curve.n_points))
    return out
