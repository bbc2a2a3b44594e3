import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scorecast.dataset import ScoreMatrix
from scorecast.errors import ValidationError
from scorecast.metrics import (
    EvalReport,
    SeedMetrics,
    derive_ranks,
    rank_metrics,
    score_losses,
)


def brute_force_rank_metrics(valid_entries, predicted, full_matrix):
    """Independent oracle: rebuild and re-sort every cohort from scratch."""
    exact = within2 = 0
    for u, i, _, _ in valid_entries:
        cohort = [(uu, s) for uu, ii, s, _ in full_matrix.entries if ii == i]
        true_sorted = sorted(cohort, key=lambda t: (-t[1], t[0]))
        true_rank = [k for k, (uu, _) in enumerate(true_sorted, 1) if uu == u][0]
        swapped = [(uu, predicted[(u, i)] if uu == u else s) for uu, s in cohort]
        pred_sorted = sorted(swapped, key=lambda t: (-t[1], t[0]))
        pred_rank = [k for k, (uu, _) in enumerate(pred_sorted, 1) if uu == u][0]
        exact += true_rank == pred_rank
        within2 += abs(true_rank - pred_rank) <= 2
    n = len(valid_entries)
    return 100.0 * exact / n, 100.0 * within2 / n


def random_instance(rng, n_models=8, n_tasks=3):
    models = tuple(f"M{k}" for k in range(n_models))
    tasks = tuple(f"T{k}" for k in range(n_tasks))
    entries = []
    for u in range(n_models):
        for i in range(n_tasks):
            if rng.random() < 0.8:
                entries.append((u, i, float(rng.integers(0, 1000)) / 1000.0, ""))
    matrix = ScoreMatrix(models, tasks, tuple(entries))
    k = max(1, len(entries) // 5)
    picks = rng.permutation(len(entries))[:k]
    valid = [entries[j] for j in picks]
    preds = {(e[0], e[1]): float(rng.integers(0, 1000)) / 1000.0 for e in valid}
    return matrix, valid, preds


class TestScoreLosses:
    def test_identical(self):
        assert score_losses([0.1, 0.9], [0.1, 0.9]) == (0.0, 0.0)

    def test_arithmetic(self):
        mse, l1 = score_losses([0.5], [0.7])
        assert mse == pytest.approx(0.04)
        assert l1 == pytest.approx(0.2)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            score_losses([0.1], [0.1, 0.2])

    def test_matches_summation_oracle(self):
        rng = np.random.default_rng(0)
        pred = rng.random(100)
        truth = rng.random(100)
        mse, l1 = score_losses(pred, truth)
        assert mse == pytest.approx(
            math.fsum((p - t) ** 2 for p, t in zip(pred, truth)) / 100, abs=1e-12)
        assert l1 == pytest.approx(
            math.fsum(abs(p - t) for p, t in zip(pred, truth)) / 100, abs=1e-12)


class TestDeriveRanks:
    def test_basic(self):
        assert derive_ranks({0: 0.9, 1: 0.7, 2: 0.8}) == {0: 1, 2: 2, 1: 3}

    def test_tie_breaks_by_registry_index(self):
        assert derive_ranks({0: 0.5, 1: 0.5}) == {0: 1, 1: 2}
        assert derive_ranks({1: 0.5, 0: 0.5}) == {0: 1, 1: 2}

    def test_empty(self):
        with pytest.raises(ValidationError):
            derive_ranks({})

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 100), min_size=1, max_size=20))
    def test_matches_sort_oracle(self, raw):
        scores = {k: v / 100.0 for k, v in enumerate(raw)}
        ranks = derive_ranks(scores)
        order = sorted(scores, key=lambda u: (-scores[u], u))
        assert ranks == {u: r for r, u in enumerate(order, 1)}
        assert sorted(ranks.values()) == list(range(1, len(raw) + 1))


class TestRankMetrics:
    def test_perfect_predictions(self):
        matrix = ScoreMatrix(("A", "B", "C"), ("T",),
                             ((0, 0, 0.9, ""), (1, 0, 0.5, ""), (2, 0, 0.1, "")))
        preds = {(1, 0): 0.5}
        acc, mae2 = rank_metrics([(1, 0, 0.5, "")], preds, matrix)
        assert acc == 100.0 and mae2 == 100.0

    def test_single_model_cohort(self):
        matrix = ScoreMatrix(("A",), ("T",), ((0, 0, 0.4, ""),))
        acc, mae2 = rank_metrics([(0, 0, 0.4, "")], {(0, 0): 0.99}, matrix)
        assert acc == 100.0 and mae2 == 100.0

    def test_rank_two_to_four_counts_mae2_not_accuracy(self):
        # hand-enumerated: truth A=0.9 B=0.7 C=0.5 D=0.3 -> B has rank 2;
        # predicting B=0.1 drops it to rank 4; |2-4| = 2 counts for MAE@2 only
        matrix = ScoreMatrix(("A", "B", "C", "D"), ("T",),
                             ((0, 0, 0.9, ""), (1, 0, 0.7, ""),
                              (2, 0, 0.5, ""), (3, 0, 0.3, "")))
        acc, mae2 = rank_metrics([(1, 0, 0.7, "")], {(1, 0): 0.1}, matrix)
        assert acc == 0.0 and mae2 == 100.0

    def test_missing_prediction(self):
        matrix = ScoreMatrix(("A",), ("T",), ((0, 0, 0.4, ""),))
        with pytest.raises(ValidationError):
            rank_metrics([(0, 0, 0.4, "")], {}, matrix)

    def test_matches_brute_force_on_100_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            matrix, valid, preds = random_instance(rng)
            got = rank_metrics(valid, preds, matrix)
            want = brute_force_rank_metrics(valid, preds, matrix)
            assert got == pytest.approx(want, abs=1e-12)
            assert got[0] <= got[1] + 1e-12  # Accuracy <= MAE@2

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(11)
        matrix, valid, preds = random_instance(rng, n_models=10, n_tasks=2)
        base = rank_metrics(valid, preds, matrix)
        for transform in (lambda x: x ** 3, lambda x: 0.05 + 0.9 * x,
                          lambda x: x / (1 + x)):
            t_entries = tuple((u, i, transform(s), tag)
                              for u, i, s, tag in matrix.entries)
            t_matrix = ScoreMatrix(matrix.models, matrix.tasks, t_entries)
            t_valid = [(u, i, transform(s), tag) for u, i, s, tag in valid]
            t_preds = {k: transform(v) for k, v in preds.items()}
            assert rank_metrics(t_valid, t_preds, t_matrix) == pytest.approx(base)


class TestEvalReport:
    def test_aggregates_are_means(self):
        rows = (SeedMetrics(0.01, 0.1, 40.0, 80.0), SeedMetrics(0.03, 0.2, 60.0, 90.0))
        report = EvalReport(per_seed=rows, n_eval=10)
        assert report.mse == pytest.approx(0.02)
        assert report.l1_mean == pytest.approx(0.15)
        assert report.rank_accuracy_pct == pytest.approx(50.0)
        assert report.mae_at_2_pct == pytest.approx(85.0)
        assert report.stds().mse == pytest.approx(0.01)

    def test_text_contains_cohort_definition(self):
        report = EvalReport(per_seed=(SeedMetrics(0.01, 0.1, 40.0, 80.0),), n_eval=5)
        text = report.to_text()
        assert "cohort" in text and "n_eval=5" in text

    def test_requires_rows(self):
        with pytest.raises(ValidationError):
            EvalReport(per_seed=(), n_eval=1)
