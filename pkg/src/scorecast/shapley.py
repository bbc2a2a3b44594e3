"""Exact-enumeration Shapley attribution of descriptive factors.

The value of a factor subset S is the negated mean squared validation error
of a pre-trained factor model with every factor outside S masked at
inference (numerical factors: input value zeroed; categorical factors:
embedding rows read as zero). Masking a subset only zeroes the matching
slices of the concatenated MLP input, so all 2^|N| subset values come from
cheap batched MLP forwards over one precomputed input matrix.

Shapley values are combined with the exact factorial weights
|S|! (|N|-|S|-1)! / |N|!, both in aggregate and per validation instance
(instance value = negated squared error of that entry).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dataset import ScoreMatrix
from .errors import BudgetError, InputError, ValidationError
from .ncf import NCFModel, build_registry_inputs

VALUE_CONVENTION = (
    "v(S) = -(mean squared validation error) with all factors outside S masked; "
    "larger is better, so a positive Shapley value marks a factor that helps "
    "predictions"
)

MAX_EXACT_FACTORS = 20


def mask_factor(model: NCFModel, factor: str) -> NCFModel:
    """View of the model with one factor's contribution zeroed at inference."""
    return model.masked([factor])


def _prepare_inputs(model: NCFModel, valid: ScoreMatrix, model_records, task_records):
    if not model.uses_factors:
        raise InputError(f"variant {model.variant!r} has no factors to attribute")
    if not valid.entries:
        raise ValidationError("validation set is empty")
    if model.masked_factors:
        model = replace(model, masked_factors=frozenset())
    reg = build_registry_inputs(model, valid, model_records, task_records)
    u = np.array([e[0] for e in valid.entries], dtype=np.int64)
    i = np.array([e[1] for e in valid.entries], dtype=np.int64)
    truth = np.array([e[2] for e in valid.entries])
    X, _ = model.batch_inputs(u, i, reg=reg)
    return X, truth


def value_function(model: NCFModel, valid: ScoreMatrix, active_subset,
                   model_records, task_records) -> float:
    """v(S): negated validation MSE with all factors outside S masked."""
    active = set(active_subset)
    all_factors = set(model.layout.factor_names())
    unknown = active - all_factors
    if unknown:
        raise InputError(f"factors not in schema: {sorted(unknown)}")
    masked_view = model.masked(all_factors - active)
    reg = build_registry_inputs(masked_view, valid, model_records, task_records)
    u = np.array([e[0] for e in valid.entries], dtype=np.int64)
    i = np.array([e[1] for e in valid.entries], dtype=np.int64)
    truth = np.array([e[2] for e in valid.entries])
    X, _ = masked_view.batch_inputs(u, i, reg=reg)
    pred = masked_view.mlp_forward(X)
    return float(-np.mean((pred - truth) ** 2))


@dataclass(frozen=True)
class ShapleyReport:
    factor_names: tuple[str, ...]
    factor_kinds: tuple[str, ...]
    phi_mean: np.ndarray
    phi_abs_mean: np.ndarray
    phi_std: np.ndarray
    per_instance: np.ndarray  # (n_factors, n_instances)
    v_full: float
    v_empty: float
    efficiency_gap: float
    max_instance_efficiency_gap: float
    convention: str = VALUE_CONVENTION

    def ordering(self) -> list[str]:
        """Factors by descending mean Shapley value."""
        order = sorted(range(len(self.factor_names)),
                       key=lambda k: (-self.phi_mean[k], k))
        return [self.factor_names[k] for k in order]

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["factor", "kind", "mean_shapley", "std_over_instances",
                        "mean_abs_shapley"])
            for k, name in enumerate(self.factor_names):
                w.writerow([name, self.factor_kinds[k],
                            format(self.phi_mean[k], ".10g"),
                            format(self.phi_std[k], ".10g"),
                            format(self.phi_abs_mean[k], ".10g")])

    def write_plot_data(self, path) -> None:
        """Long-form per-instance (factor, value) pairs for beeswarm plots."""
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["factor", "instance", "shapley_value"])
            for k, name in enumerate(self.factor_names):
                for e, val in enumerate(self.per_instance[k]):
                    w.writerow([name, e, format(val, ".10g")])


def subset_values(model: NCFModel, valid: ScoreMatrix, model_records, task_records,
                  players: tuple[str, ...], chunk: int = 256) -> np.ndarray:
    """Per-entry values for every subset of the player factors.

    Returns an array of shape (2^K, n_entries): row b holds the negated
    squared errors when exactly the players whose bit is set in b are active
    (non-player factors stay active throughout).
    """
    X, truth = _prepare_inputs(model, valid, model_records, task_records)
    lay = model.layout
    K = len(players)
    n_cols = X.shape[1]
    slices = [lay.factor_slices[p] for p in players]
    n_subsets = 1 << K
    values = np.empty((n_subsets, len(truth)))
    col_masks = np.empty((chunk, n_cols))
    for start in range(0, n_subsets, chunk):
        stop = min(start + chunk, n_subsets)
        cm = col_masks[: stop - start]
        cm[:] = 1.0
        for b in range(start, stop):
            row = cm[b - start]
            for k in range(K):
                if not (b >> k) & 1:
                    row[slices[k]] = 0.0
        stacked = (cm[:, None, :] * X[None, :, :]).reshape(-1, n_cols)
        pred = model.mlp_forward(stacked).reshape(stop - start, len(truth))
        values[start:stop] = -((pred - truth[None, :]) ** 2)
    return values


def exact_shapley(model: NCFModel, valid: ScoreMatrix, model_records, task_records,
                  factor_set=None) -> ShapleyReport:
    """Shapley values of every factor over the validation set, by exact
    enumeration of all factor subsets (memoized: each subset is evaluated
    once and reused for every marginal difference)."""
    lay = model.layout
    players = tuple(factor_set) if factor_set is not None else lay.factor_names()
    unknown = set(players) - set(lay.factor_names())
    if unknown:
        raise InputError(f"factors not in schema: {sorted(unknown)}")
    K = len(players)
    if K > MAX_EXACT_FACTORS:
        raise BudgetError(
            f"{K} factors means 2^{K} subsets; exact enumeration is capped at "
            f"{MAX_EXACT_FACTORS} (sampling estimators are out of scope)"
        )
    kinds = []
    enc_kinds = {}
    for enc in (model.model_encoder, model.task_encoder):
        if enc is not None:
            enc_kinds.update({n: k for n, k, _ in enc.specs})
    kinds = tuple(enc_kinds[p] for p in players)

    values = subset_values(model, valid, model_records, task_records, players)
    n_inst = values.shape[1]
    fact = [math.factorial(k) for k in range(K + 1)]
    weight_by_size = np.array(
        [fact[s] * fact[K - s - 1] / fact[K] for s in range(K)]
    )
    all_masks = np.arange(1 << K, dtype=np.int64)
    sizes = np.array([bin(b).count("1") for b in range(1 << K)], dtype=np.int64)
    per_instance = np.zeros((K, n_inst))
    for k in range(K):
        without = all_masks[(all_masks >> k) & 1 == 0]
        w = weight_by_size[sizes[without]]
        diff = values[without + (1 << k)] - values[without]
        per_instance[k] = w @ diff
    v_full_inst = values[-1]
    v_empty_inst = values[0]
    gap_inst = np.abs(per_instance.sum(axis=0) - (v_full_inst - v_empty_inst))
    phi_mean = per_instance.mean(axis=1)
    v_full = float(v_full_inst.mean())
    v_empty = float(v_empty_inst.mean())
    return ShapleyReport(
        factor_names=players,
        factor_kinds=kinds,
        phi_mean=phi_mean,
        phi_abs_mean=np.abs(per_instance).mean(axis=1),
        phi_std=per_instance.std(axis=1),
        per_instance=per_instance,
        v_full=v_full,
        v_empty=v_empty,
        efficiency_gap=abs(float(phi_mean.sum()) - (v_full - v_empty)),
        max_instance_efficiency_gap=float(gap_inst.max()),
    )
