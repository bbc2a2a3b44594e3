"""Experiment orchestration: benchmark-perspective evaluation, cold-start
scenarios against the scaling baseline, leave-one-out influence analysis
with correlation + hierarchical clustering, and the sparsity sweep.

Every experiment is deterministic given (dataset, config, seed list):
splits, initialization, and sampling all derive from the seeds, and result
tables are assembled in fixed (method/entity, seed) order.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import mf, ncf
from .dataset import ScoreMatrix, SplitSpec, mask_to_sparsity, split
from .errors import CoverageError, InputError, ScorecastError, TrainingError
from .metrics import EvalReport, SeedMetrics, evaluate
from .mf import TrainConfig
from .scaling import scaling_predict_for_model

CF_METHODS = ("mf", "ncf", "ncf_factor", "factor_only")
ALL_METHODS = CF_METHODS + ("scaling_baseline",)
_VARIANT_OF = {"ncf": "id_only", "ncf_factor": "factor_enhanced", "factor_only": "factor_only"}

DEFAULT_SEEDS = (1, 2, 3, 4, 5)


def train_method(method: str, train: ScoreMatrix, model_records, task_records,
                 config: TrainConfig):
    if method == "mf":
        return mf.train_mf(train, config)
    if method in _VARIANT_OF:
        return ncf.train_ncf(train, model_records, task_records, _VARIANT_OF[method], config)
    raise InputError(f"unknown trainable method {method!r}")


def predict_with(method: str, model, entries, matrix: ScoreMatrix,
                 model_records, task_records):
    if method == "mf":
        return mf.predict_entries(model, entries)
    return ncf.predict_entries(model, entries, matrix, model_records, task_records)


def _scaling_predictions(valid: ScoreMatrix, train: ScoreMatrix, model_records):
    """Per-entry family-curve predictions; entries without coverage are skipped."""
    preds = {}
    covered = []
    for entry in valid.entries:
        u, i = entry[0], entry[1]
        rec = model_records.get(valid.models[u])
        if rec is None:
            continue
        try:
            pred, _ = scaling_predict_for_model(rec, train, i, model_records)
        except (CoverageError, ScorecastError):
            continue
        preds[(u, i)] = pred
        covered.append(entry)
    return preds, covered


def run_benchmark_eval(matrix: ScoreMatrix, model_records, task_records,
                       methods=CF_METHODS, seeds=DEFAULT_SEEDS,
                       config: TrainConfig = TrainConfig(),
                       validation_fraction: float = 0.05) -> dict[str, EvalReport]:
    """Train and evaluate each method on `seeds` random splits.

    Returns one EvalReport per method, in the given method order; per-seed
    rows are retained for auditing.
    """
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise InputError(f"unknown methods {sorted(unknown)}; choose from {ALL_METHODS}")
    reports: dict[str, EvalReport] = {}
    for method in methods:
        per_seed = []
        counts = []
        for seed in seeds:
            spec = SplitSpec(seed=seed, validation_fraction=validation_fraction)
            train, valid = split(matrix, spec)
            run_config = _with_seed(config, seed)
            if method == "scaling_baseline":
                preds, covered = _scaling_predictions(valid, train, model_records)
                if not covered:
                    raise CoverageError(
                        f"scaling baseline covers no validation entry (seed {seed})"
                    )
                sub_valid = valid.with_entries(covered)
                per_seed.append(evaluate(sub_valid, preds, matrix))
                counts.append(len(covered))
                continue
            try:
                model = train_method(method, train, model_records, task_records, run_config)
            except TrainingError as exc:
                raise TrainingError(f"method {method!r}, seed {seed}: {exc}") from exc
            preds = predict_with(method, model, valid.entries, matrix,
                                 model_records, task_records)
            per_seed.append(evaluate(valid, preds, matrix))
            counts.append(len(valid.entries))
        reports[method] = EvalReport(per_seed=tuple(per_seed), n_eval=min(counts))
    return reports


def _with_seed(config: TrainConfig, seed: int) -> TrainConfig:
    from dataclasses import replace

    return replace(config, seed=seed)


@dataclass(frozen=True)
class ScenarioTaskRow:
    seed: int
    task: str
    true_score: float
    cpp_pred: float
    scaling_pred: float | None


@dataclass(frozen=True)
class ScenarioResult:
    target_model: str
    scenario: str
    report: EvalReport
    scaling_report: EvalReport | None
    rows: tuple[ScenarioTaskRow, ...]
    scaling_coverage: tuple[int, int]  # (covered validation entries, total)


def run_scenario(matrix: ScoreMatrix, model_records, task_records,
                 target_model: str, scenario: str, seeds=DEFAULT_SEEDS,
                 config: TrainConfig = TrainConfig()) -> ScenarioResult:
    """Cold-start evaluation of one model: train factor-enhanced NCF on the
    scenario split, predict the held-out tasks, and fit the in-family
    scaling curve per task where coverage allows."""
    if scenario not in ("cpp0", "cpp2"):
        raise InputError(f"scenario must be cpp0 or cpp2, got {scenario!r}")
    target_idx = matrix.model_index(target_model)
    target_rec = model_records.get(target_model)
    if target_rec is None:
        raise InputError(f"no factor record for {target_model!r}")
    per_seed = []
    scaling_per_seed = []
    scaling_counts = []
    rows = []
    covered = total = 0
    n_eval = 0
    for seed in seeds:
        train, valid = split(matrix, SplitSpec(seed=seed, scenario=scenario,
                                               target_model=target_model))
        in_train = sum(1 for e in train.entries if e[0] == target_idx)
        expected = 0 if scenario == "cpp0" else 2
        assert in_train == expected, f"scenario split invariant violated: {in_train}"
        n_eval = len(valid.entries)
        model = ncf.train_ncf(train, model_records, task_records, "factor_enhanced",
                              _with_seed(config, seed))
        preds = ncf.predict_entries(model, valid.entries, matrix,
                                    model_records, task_records)
        per_seed.append(evaluate(valid, preds, matrix))
        scaling_preds = {}
        for u, i, s, _ in valid.entries:
            total += 1
            spred = None
            try:
                spred, _ = scaling_predict_for_model(target_rec, train, i, model_records)
                scaling_preds[(u, i)] = spred
                covered += 1
            except (CoverageError, ScorecastError):
                pass
            rows.append(ScenarioTaskRow(seed=seed, task=matrix.tasks[i], true_score=s,
                                        cpp_pred=preds[(u, i)], scaling_pred=spred))
        if scaling_preds:
            sub = valid.with_entries([e for e in valid.entries
                                      if (e[0], e[1]) in scaling_preds])
            scaling_per_seed.append(evaluate(sub, scaling_preds, matrix))
            scaling_counts.append(len(scaling_preds))
    scaling_report = (EvalReport(per_seed=tuple(scaling_per_seed),
                                 n_eval=min(scaling_counts))
                      if scaling_per_seed else None)
    return ScenarioResult(
        target_model=target_model, scenario=scenario,
        report=EvalReport(per_seed=tuple(per_seed), n_eval=n_eval),
        scaling_report=scaling_report, rows=tuple(rows),
        scaling_coverage=(covered, total),
    )


@dataclass
class LooResult:
    axis: str
    masked_entities: tuple[str, ...]
    valid_entities: tuple[str, ...]
    loss_matrix: np.ndarray       # masked x validation, seed-averaged MSE
    baseline_losses: np.ndarray   # per validation entity, nothing masked
    delta_matrix: np.ndarray
    normalized_delta: np.ndarray
    degenerate_columns: tuple[str, ...]
    correlation: np.ndarray       # over masked entities
    clusters: tuple[tuple[str, ...], ...]
    merges: tuple[tuple[int, int, float, int], ...]
    loss_kind: str = "mse"


def _entity_losses(preds, valid: ScoreMatrix, axis: str, entity_count: int) -> np.ndarray:
    """Mean squared loss per entity over its validation entries (nan if none)."""
    sums = np.zeros(entity_count)
    counts = np.zeros(entity_count)
    for u, i, s, _ in valid.entries:
        b = u if axis == "models" else i
        d = preds[(u, i)] - s
        sums[b] += d * d
        counts[b] += 1
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def _loo_job(args):
    (train, valid, matrix, model_records, task_records, method, config,
     axis, entity_count) = args
    model = train_method(method, train, model_records, task_records, config)
    preds = predict_with(method, model, valid.entries, matrix, model_records, task_records)
    return _entity_losses(preds, valid, axis, entity_count)


def leave_one_out(matrix: ScoreMatrix, model_records, task_records,
                  axis: str = "models", seeds=(1, 2, 3),
                  config: TrainConfig = TrainConfig(),
                  method: str = "ncf_factor",
                  validation_fraction: float = 0.05,
                  cut_height: float = 0.5,
                  workers: int = 1) -> LooResult:
    """Influence analysis: how much each entity's training data matters for
    predicting each validation entity.

    Per seed, a random split fixes the validation set; the baseline trains
    on the full train split, and one run per masked entity trains with that
    entity's train entries removed. Cell (A, B) holds the mean validation
    loss on B's validation entries; deltas against the baseline are column
    normalized, row-correlated, and clustered.
    """
    if axis not in ("models", "tasks"):
        raise InputError(f"axis must be models or tasks, got {axis!r}")
    names = matrix.models if axis == "models" else matrix.tasks
    if len(names) < 3:
        raise InputError(f"need >= 3 entities on axis {axis!r}")
    pos = 0 if axis == "models" else 1
    entity_count = len(names)

    jobs = []
    job_keys = []
    valid_cover = np.zeros(entity_count, dtype=bool)
    masked_ok = np.zeros(entity_count, dtype=bool)
    for seed in seeds:
        train, valid = split(matrix, SplitSpec(seed=seed,
                                               validation_fraction=validation_fraction))
        for e in valid.entries:
            valid_cover[e[pos]] = True
        run_config = _with_seed(config, seed)
        jobs.append((train, valid, matrix, model_records, task_records, method,
                     run_config, axis, entity_count))
        job_keys.append(("baseline", seed))
        for a in range(entity_count):
            kept = [e for e in train.entries if e[pos] != a]
            if len(kept) == len(train.entries):
                continue  # nothing to mask for this entity this seed
            masked_ok[a] = True
            jobs.append((train.with_entries(kept), valid, matrix, model_records,
                         task_records, method, run_config, axis, entity_count))
            job_keys.append((a, seed))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_loo_job, jobs))
    else:
        results = [_loo_job(j) for j in jobs]

    skipped = [names[a] for a in range(entity_count) if not masked_ok[a]]
    for name in skipped:
        warnings.warn(f"entity {name!r} has no training entries in any seed; skipped")
    masked_ids = [a for a in range(entity_count) if masked_ok[a]]
    valid_ids = [b for b in range(entity_count) if valid_cover[b]]
    if not valid_ids:
        raise InputError("no entity has validation coverage; increase validation_fraction")

    base_acc = np.zeros((len(valid_ids),))
    base_cnt = np.zeros((len(valid_ids),))
    loss_acc = np.zeros((len(masked_ids), len(valid_ids)))
    loss_cnt = np.zeros((len(masked_ids), len(valid_ids)))
    col_of = {b: k for k, b in enumerate(valid_ids)}
    row_of = {a: k for k, a in enumerate(masked_ids)}
    for key, vec in zip(job_keys, results):
        sub = vec[valid_ids]
        ok = ~np.isnan(sub)
        if key[0] == "baseline":
            base_acc[ok] += sub[ok]
            base_cnt[ok] += 1
        else:
            r = row_of[key[0]]
            loss_acc[r, ok] += sub[ok]
            loss_cnt[r, ok] += 1
    baseline = base_acc / np.maximum(base_cnt, 1)
    loss_matrix = loss_acc / np.maximum(loss_cnt, 1)

    delta = loss_matrix - baseline[None, :]
    normalized, degenerate = normalize_columns(
        delta, labels=[names[b] for b in valid_ids])
    good = ~degenerate
    if good.sum() < 2:
        raise InputError("fewer than 2 usable delta columns; cannot correlate rows")
    correlation = np.corrcoef(normalized[:, good])
    correlation = np.clip(correlation, -1.0, 1.0)
    np.fill_diagonal(correlation, 1.0)
    labels = tuple(names[a] for a in masked_ids)
    clusters, merges = hierarchical_cluster(correlation, labels=labels,
                                            cut_height=cut_height)
    return LooResult(
        axis=axis, masked_entities=labels,
        valid_entities=tuple(names[b] for b in valid_ids),
        loss_matrix=loss_matrix, baseline_losses=baseline, delta_matrix=delta,
        normalized_delta=normalized,
        degenerate_columns=tuple(names[valid_ids[k]] for k in np.flatnonzero(degenerate)),
        correlation=correlation, clusters=clusters, merges=merges,
    )


def normalize_columns(delta: np.ndarray, labels=None):
    """Column-wise z-scoring of a delta-loss matrix.

    Constant columns carry no comparative information: they normalize to
    zeros, are flagged in the returned mask, and trigger a warning so the
    caller can exclude them from correlation.
    """
    delta = np.asarray(delta, dtype=np.float64)
    col_std = delta.std(axis=0)
    col_mean = delta.mean(axis=0)
    degenerate = col_std < 1e-12
    normalized = np.zeros_like(delta)
    good = ~degenerate
    normalized[:, good] = (delta[:, good] - col_mean[good]) / col_std[good]
    for k in np.flatnonzero(degenerate):
        label = labels[k] if labels is not None else str(k)
        warnings.warn(f"validation entity {label!r} has a constant delta column; "
                      f"excluded from correlation")
    return normalized, degenerate


def hierarchical_cluster(correlation: np.ndarray, labels=None, cut_height: float = 0.5):
    """Agglomerative average-linkage clustering at distance 1 - correlation.

    Merge order is deterministic: the closest pair wins, ties broken by the
    smallest (older, newer) cluster-id pair. Returns (flat clusters at the
    cut height, full merge list as (id_a, id_b, height, new_id)).
    """
    C = np.asarray(correlation, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InputError(f"correlation must be square, got {C.shape}")
    if not np.allclose(C, C.T, atol=1e-8):
        raise InputError("correlation matrix must be symmetric")
    n = C.shape[0]
    if labels is None:
        labels = tuple(str(k) for k in range(n))
    if n == 1:
        return ((labels[0],),), ()
    D = 1.0 - C
    members: dict[int, list[int]] = {k: [k] for k in range(n)}
    dist: dict[tuple[int, int], float] = {}
    for a in range(n):
        for b in range(a + 1, n):
            dist[(a, b)] = D[a, b]
    merges = []
    next_id = n
    while len(members) > 1:
        best = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        (a, b), height = best
        na, nb = len(members[a]), len(members[b])
        merged = sorted(members[a] + members[b])
        for c in members:
            if c in (a, b):
                continue
            da = dist[(min(a, c), max(a, c))]
            db = dist[(min(b, c), max(b, c))]
            dist[(c, next_id)] = (na * da + nb * db) / (na + nb)
        for key in [k for k in dist if a in k or b in k]:
            del dist[key]
        del members[a], members[b]
        members[next_id] = merged
        merges.append((a, b, float(height), next_id))
        next_id += 1
    # flat clusters: replay merges at or below the cut. Average linkage is
    # monotone, so these always form a prefix of the merge list.
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    alias = {k: k for k in range(n)}  # cluster id -> an original member index
    for a, b, height, new_id in merges:
        ra, rb = find(alias[a]), find(alias[b])
        alias[new_id] = min(ra, rb)
        if height <= cut_height:
            parent[max(ra, rb)] = min(ra, rb)
    flat: dict[int, list[int]] = {}
    for k in range(n):
        flat.setdefault(find(k), []).append(k)
    clusters = tuple(tuple(labels[k] for k in sorted(v))
                     for _, v in sorted(flat.items()))
    return clusters, tuple(merges)


@dataclass(frozen=True)
class SparsityRow:
    sparsity: float
    l1_mean: float
    accuracy_mean: float
    mae_at_2_mean: float
    mse_mean: float
    per_seed: tuple[SeedMetrics, ...]


def sparsity_sweep(matrix: ScoreMatrix, model_records, task_records,
                   sparsity_levels, seeds=DEFAULT_SEEDS,
                   config: TrainConfig = TrainConfig(), method: str = "mf",
                   validation_fraction: float = 0.05) -> tuple[SparsityRow, ...]:
    """Metrics as a function of training-grid sparsity.

    The validation set is fixed per seed across all levels; only training
    entries are masked away.
    """
    levels = [float(s) for s in sparsity_levels]
    rows = []
    splits = {seed: split(matrix, SplitSpec(seed=seed,
                                            validation_fraction=validation_fraction))
              for seed in seeds}
    for level in levels:
        per_seed = []
        for seed in seeds:
            train, valid = splits[seed]
            masked = mask_to_sparsity(train, level, seed)
            model = train_method(method, masked, model_records, task_records,
                                 _with_seed(config, seed))
            preds = predict_with(method, model, valid.entries, matrix,
                                 model_records, task_records)
            per_seed.append(evaluate(valid, preds, matrix))
        rows.append(SparsityRow(
            sparsity=level,
            l1_mean=float(np.mean([s.l1_mean for s in per_seed])),
            accuracy_mean=float(np.mean([s.rank_accuracy_pct for s in per_seed])),
            mae_at_2_mean=float(np.mean([s.mae_at_2_pct for s in per_seed])),
            mse_mean=float(np.mean([s.mse for s in per_seed])),
            per_seed=tuple(per_seed),
        ))
    return tuple(rows)


# -- report serialization (deterministic, byte-stable for fixed inputs) -------


def _g(x) -> str:
    return format(float(x), ".10g")


def write_eval_csv(reports: dict[str, EvalReport], seeds, path) -> None:
    """Benchmark-table layout: one row per method, mean (and, for multi-seed
    runs, population std) per metric."""
    import csv

    multi = len(tuple(seeds)) > 1
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        head = ["method", "mse_mean"]
        if multi:
            head.append("mse_std")
        head.append("l1_mean")
        if multi:
            head.append("l1_std")
        head.append("accuracy_mean")
        if multi:
            head.append("accuracy_std")
        head.append("mae_at_2_mean")
        if multi:
            head.append("mae_at_2_std")
        head.append("n_eval")
        w.writerow(head)
        for method, r in reports.items():
            s = r.stds()
            row = [method, _g(r.mse)]
            if multi:
                row.append(_g(s.mse))
            row.append(_g(r.l1_mean))
            if multi:
                row.append(_g(s.l1_mean))
            row.append(_g(r.rank_accuracy_pct))
            if multi:
                row.append(_g(s.rank_accuracy_pct))
            row.append(_g(r.mae_at_2_pct))
            if multi:
                row.append(_g(s.mae_at_2_pct))
            row.append(str(r.n_eval))
            w.writerow(row)


def write_per_seed_csv(reports: dict[str, EvalReport], seeds, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "seed", "mse", "l1", "accuracy", "mae_at_2"])
        for method, r in reports.items():
            for seed, srow in zip(seeds, r.per_seed):
                w.writerow([method, seed, _g(srow.mse), _g(srow.l1_mean),
                            _g(srow.rank_accuracy_pct), _g(srow.mae_at_2_pct)])


def write_scenario_csv(result: ScenarioResult, seeds, report_path, rows_path) -> None:
    import csv

    with open(report_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["predictor", "mse_mean", "mse_std", "l1_mean", "l1_std",
                    "accuracy_mean", "accuracy_std", "mae_at_2_mean", "mae_at_2_std",
                    "n_eval"])
        for name, rep in (("cpp", result.report), ("scaling", result.scaling_report)):
            if rep is None:
                continue
            s = rep.stds()
            w.writerow([name, _g(rep.mse), _g(s.mse), _g(rep.l1_mean), _g(s.l1_mean),
                        _g(rep.rank_accuracy_pct), _g(s.rank_accuracy_pct),
                        _g(rep.mae_at_2_pct), _g(s.mae_at_2_pct), str(rep.n_eval)])
    with open(rows_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "task", "true_score", "cpp_pred", "scaling_pred"])
        for row in result.rows:
            w.writerow([row.seed, row.task, _g(row.true_score), _g(row.cpp_pred),
                        "" if row.scaling_pred is None else _g(row.scaling_pred)])


def write_sparsity_csv(rows, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sparsity", "l1_mean", "accuracy_mean", "mae_at_2_mean", "mse_mean"])
        for r in rows:
            w.writerow([_g(r.sparsity), _g(r.l1_mean), _g(r.accuracy_mean),
                        _g(r.mae_at_2_mean), _g(r.mse_mean)])


def write_loo_files(result: LooResult, outdir) -> None:
    """Correlation/cluster report plus the intermediate matrices as plot data."""
    import csv
    from pathlib import Path

    outdir = Path(outdir)
    with open(outdir / "report.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["cluster", "entity"])
        for k, group in enumerate(result.clusters, start=1):
            for name in group:
                w.writerow([k, name])
    plots = outdir / "plotdata"
    plots.mkdir(exist_ok=True)

    def write_matrix(name, mat, row_labels, col_labels):
        with open(plots / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([""] + list(col_labels))
            for label, row in zip(row_labels, mat):
                w.writerow([label] + [_g(v) for v in row])

    write_matrix("loss_matrix.csv", result.loss_matrix,
                 result.masked_entities, result.valid_entities)
    write_matrix("delta_normalized.csv", result.normalized_delta,
                 result.masked_entities, result.valid_entities)
    write_matrix("correlation.csv", result.correlation,
                 result.masked_entities, result.masked_entities)
    with open(plots / "baseline_losses.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["entity", "baseline_loss"])
        for name, v in zip(result.valid_entities, result.baseline_losses):
            w.writerow([name, _g(v)])
