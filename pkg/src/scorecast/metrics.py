"""Score-loss and rank-accuracy evaluation of predictions against truth.

Rank metrics are computed per task over the cohort of all models with an
observed true score on that task (train plus validation). The validation
model's true score is swapped for its prediction to derive the predicted
rank; everything else in the cohort keeps its true score.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import ScoreMatrix
from .errors import ValidationError

COHORT_DEFINITION = (
    "rank cohort per task = all models with an observed true score on that task "
    "(train + validation); rank 1 = highest score; ties broken by ascending "
    "registry index"
)


@dataclass(frozen=True)
class SeedMetrics:
    mse: float
    l1_mean: float
    rank_accuracy_pct: float
    mae_at_2_pct: float


@dataclass(frozen=True)
class EvalReport:
    """Per-seed and aggregated evaluation metrics.

    Aggregates are plain means of the per-seed values; standard deviations
    are population (ddof=0) over seeds.
    """

    per_seed: tuple[SeedMetrics, ...]
    n_eval: int
    cohort_definition: str = COHORT_DEFINITION
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.per_seed:
            raise ValidationError("EvalReport needs at least one seed row")
        if self.n_eval < 1:
            raise ValidationError("n_eval must be >= 1")
        for row in self.per_seed:
            if not (0.0 <= row.rank_accuracy_pct <= 100.0
                    and 0.0 <= row.mae_at_2_pct <= 100.0):
                raise ValidationError(f"percentages outside [0,100]: {row}")

    def _agg(self, attr: str) -> float:
        return float(np.mean([getattr(s, attr) for s in self.per_seed]))

    def _std(self, attr: str) -> float:
        return float(np.std([getattr(s, attr) for s in self.per_seed]))

    @property
    def mse(self) -> float:
        return self._agg("mse")

    @property
    def l1_mean(self) -> float:
        return self._agg("l1_mean")

    @property
    def rank_accuracy_pct(self) -> float:
        return self._agg("rank_accuracy_pct")

    @property
    def mae_at_2_pct(self) -> float:
        return self._agg("mae_at_2_pct")

    def stds(self) -> SeedMetrics:
        return SeedMetrics(
            self._std("mse"), self._std("l1_mean"),
            self._std("rank_accuracy_pct"), self._std("mae_at_2_pct"),
        )

    def to_text(self) -> str:
        lines = [
            f"n_eval={self.n_eval} seeds={len(self.per_seed)}",
            f"cohort: {self.cohort_definition}",
            f"mse={self.mse:.6g} l1={self.l1_mean:.6g} "
            f"accuracy={self.rank_accuracy_pct:.4g}% mae@2={self.mae_at_2_pct:.4g}%",
        ]
        for k, s in enumerate(self.per_seed):
            lines.append(
                f"  seed[{k}]: mse={s.mse:.6g} l1={s.l1_mean:.6g} "
                f"accuracy={s.rank_accuracy_pct:.4g}% mae@2={s.mae_at_2_pct:.4g}%"
            )
        return "\n".join(lines)


def score_losses(pred, truth) -> tuple[float, float]:
    """(mean squared error, mean absolute error) between two score lists."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValidationError(
            f"prediction/truth length mismatch or empty: {pred.shape} vs {truth.shape}"
        )
    diff = pred - truth
    return float(np.mean(diff * diff)), float(np.mean(np.abs(diff)))


def derive_ranks(scores_by_model: dict[int, float]) -> dict[int, int]:
    """Map model index -> rank (1 = highest score).

    Ties are broken by ascending registry index, which keeps the ranking
    deterministic regardless of dict insertion order.
    """
    if not scores_by_model:
        raise ValidationError("cannot rank an empty cohort")
    order = sorted(scores_by_model, key=lambda u: (-scores_by_model[u], u))
    return {u: r for r, u in enumerate(order, start=1)}


def rank_metrics(
    valid_entries,
    predicted_scores: dict[tuple[int, int], float],
    full_matrix: ScoreMatrix,
) -> tuple[float, float]:
    """(Accuracy %, MAE@2 %) of predicted ranks over validation entries.

    For each validation entry (u, i): the true rank of u is taken within the
    cohort of all models observed on task i in full_matrix; the predicted
    rank replaces u's score with its prediction in the same cohort. Accuracy
    counts exact rank matches, MAE@2 counts |true - predicted| <= 2.
    """
    cohorts: dict[int, dict[int, float]] = {}
    for u, i, s, _ in full_matrix.entries:
        cohorts.setdefault(i, {})[u] = s
    exact = 0
    within2 = 0
    total = 0
    for entry in valid_entries:
        u, i = entry[0], entry[1]
        cohort = cohorts.get(i, {})
        if u not in cohort:
            raise ValidationError(
                f"validation model index {u} has no observed true score on task {i}"
            )
        if (u, i) not in predicted_scores:
            raise ValidationError(f"missing prediction for validation entry ({u},{i})")
        true_rank = derive_ranks(cohort)[u]
        swapped = dict(cohort)
        swapped[u] = predicted_scores[(u, i)]
        pred_rank = derive_ranks(swapped)[u]
        exact += int(true_rank == pred_rank)
        within2 += int(abs(true_rank - pred_rank) <= 2)
        total += 1
    if total == 0:
        raise ValidationError("no validation entries to rank")
    return 100.0 * exact / total, 100.0 * within2 / total


def evaluate(valid: ScoreMatrix, predicted_scores, full_matrix: ScoreMatrix) -> SeedMetrics:
    """All four metrics for one seed's validation set."""
    pred = [predicted_scores[(u, i)] for u, i, _, _ in valid.entries]
    truth = [s for _, _, s, _ in valid.entries]
    mse, l1 = score_losses(pred, truth)
    acc, mae2 = rank_metrics(valid.entries, predicted_scores, full_matrix)
    return SeedMetrics(mse, l1, acc, mae2)
