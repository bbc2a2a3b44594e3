"""Command-line harness: dataset validation, training, prediction, and the
experiment battery.

Every run writes a self-describing directory: config.resolved (all settings
materialized, plus the dataset hash and tool version), report.csv,
plotdata/*.csv, optional checkpoints/, and log.txt. Settings resolve as
defaults < config file (flat `key = value` lines) < command-line flags.

Exit codes: 0 success, 2 bad input (files, schema, config, infeasible
scenario), 3 runtime failure (e.g. diverged training).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__, analysis, mf, ncf, scaling, shapley
from .dataset import (
    SplitSpec,
    bundled_path,
    check_linkage,
    load_model_factors,
    load_scores,
    load_task_factors,
    split,
)
from .errors import ConfigError, InputError, ScorecastError
from .metrics import evaluate
from .mf import TrainConfig

DEFAULTS = {
    "scores": str(bundled_path("scores.csv")),
    "models": str(bundled_path("models.csv")),
    "tasks": str(bundled_path("tasks.csv")),
    "method": "ncf_factor",
    "methods": "mf,ncf,ncf_factor,factor_only",
    "latent_dim": 10,
    "learning_rate": 0.01,
    "iterations": 250_000,
    "l2_penalty": 0.0,
    "batch_size": 64,
    "factor_width": 8,
    "hidden_sizes": "64,32",
    "seed": 1,
    "seeds": "5",
    "validation_fraction": 0.05,
    "target": "",
    "scenario": "cpp0",
    "levels": "0.496,0.888",
    "axis": "models",
    "cut_height": 0.5,
    "workers": int(os.environ.get("SCORECAST_WORKERS", "1")),
    "out": "runs/latest",
    "checkpoint": "",
}

_INT_KEYS = {"latent_dim", "iterations", "batch_size", "factor_width", "seed", "workers"}
_FLOAT_KEYS = {"learning_rate", "l2_penalty", "validation_fraction", "cut_height"}
_BOOL_KEYS: set[str] = set()


def parse_config_file(path) -> dict:
    """Flat `key = value` settings file; # starts a comment."""
    settings = {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        settings[key] = value
    return settings


def _coerce(key: str, value):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _BOOL_KEYS:
            if isinstance(value, bool):
                return value
            return str(value).strip().lower() in ("1", "true", "yes", "on")
        return str(value)
    except ValueError:
        raise ConfigError(f"bad value {value!r} for setting {key!r}") from None


def resolve_settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        for key, value in parse_config_file(args.config).items():
            settings[key] = _coerce(key, value)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = _coerce(key, flag)
    return settings


def parse_seeds(text) -> tuple[int, ...]:
    """Either a count N (seeds 1..N) or an explicit comma list."""
    text = str(text).strip()
    if "," in text:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    return tuple(range(1, int(text) + 1))


def parse_levels(text) -> tuple[float, ...]:
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def train_config(settings: dict, seed: int | None = None) -> TrainConfig:
    hidden = tuple(int(tok) for tok in str(settings["hidden_sizes"]).split(",") if tok.strip())
    return TrainConfig(
        latent_dim=settings["latent_dim"],
        learning_rate=settings["learning_rate"],
        iterations=settings["iterations"],
        l2_penalty=settings["l2_penalty"],
        seed=settings["seed"] if seed is None else seed,
        hidden_sizes=hidden,
        batch_size=settings["batch_size"],
        factor_width=settings["factor_width"],
    )


def load_dataset(settings: dict):
    matrix = load_scores(settings["scores"], warn=lambda msg: print(f"warning: {msg}",
                                                                    file=sys.stderr))
    model_records = load_model_factors(settings["models"])
    task_records = load_task_factors(settings["tasks"])
    check_linkage(matrix, model_records, task_records)
    return matrix, model_records, task_records


class RunDir:
    """Run-directory writer: config.resolved, report/plotdata files, log.txt."""

    def __init__(self, settings: dict, dataset_hash: str):
        self.path = Path(settings["out"])
        self.path.mkdir(parents=True, exist_ok=True)
        (self.path / "plotdata").mkdir(exist_ok=True)
        self._log_lines: list[str] = []
        resolved = dict(settings)
        resolved["dataset_hash"] = dataset_hash
        resolved["tool_version"] = __version__
        lines = [f"{key} = {resolved[key]}" for key in sorted(resolved)]
        (self.path / "config.resolved").write_text("\n".join(lines) + "\n",
                                                   encoding="utf-8")

    def log(self, message: str) -> None:
        self._log_lines.append(message)
        print(message)

    def finish(self) -> None:
        (self.path / "log.txt").write_text("\n".join(self._log_lines) + "\n",
                                           encoding="utf-8")


def cmd_validate(args) -> int:
    settings = resolve_settings(args)
    matrix, model_records, task_records = load_dataset(settings)
    print(f"{matrix.n_models} models, {matrix.n_tasks} tasks, "
          f"density {matrix.density:.2f}")
    print(f"{len(matrix.entries)} observed scores, all within [0,1]; "
          f"factor records cover every referenced identifier")
    print(f"dataset hash {matrix.content_hash()[:16]}")
    return 0


def cmd_train(args) -> int:
    settings = resolve_settings(args)
    matrix, model_records, task_records = load_dataset(settings)
    run = RunDir(settings, matrix.content_hash())
    seed = settings["seed"]
    config = train_config(settings)
    train, valid = split(matrix, SplitSpec(seed=seed,
                                           validation_fraction=settings["validation_fraction"]))
    method = settings["method"]
    run.log(f"training {method} on {len(train.entries)} entries "
            f"(holding out {len(valid.entries)}), seed {seed}")
    model = analysis.train_method(method, train, model_records, task_records, config)
    preds = analysis.predict_with(method, model, valid.entries, matrix,
                                  model_records, task_records)
    report = evaluate(valid, preds, matrix)
    run.log(f"validation: mse {report.mse:.6g} l1 {report.l1_mean:.6g} "
            f"accuracy {report.rank_accuracy_pct:.4g}% mae@2 {report.mae_at_2_pct:.4g}%")
    ckpt_dir = run.path / "checkpoints"
    ckpt_dir.mkdir(exist_ok=True)
    ckpt = ckpt_dir / f"{method}.npz"
    if method == "mf":
        model.save(ckpt)
    else:
        ncf.save_ncf(model, ckpt)
    run.log(f"checkpoint written to {ckpt}")
    reports = {method: analysis.EvalReport(per_seed=(report,), n_eval=len(valid.entries))}
    analysis.write_eval_csv(reports, (seed,), run.path / "report.csv")
    run.finish()
    return 0


def cmd_predict(args) -> int:
    settings = resolve_settings(args)
    if not settings["checkpoint"]:
        raise ConfigError("predict needs --checkpoint")
    if not getattr(args, "model", None):
        raise ConfigError("predict needs --model")
    matrix, model_records, task_records = load_dataset(settings)
    run = RunDir(settings, matrix.content_hash())
    target = args.model
    wanted = getattr(args, "task_list", None)
    task_names = (list(matrix.tasks) if wanted in (None, "all")
                  else [t.strip() for t in wanted.split(",")])
    for t in task_names:
        matrix.task_index(t)  # raises LinkageError for unknown tasks
    path = settings["checkpoint"]
    model_index = matrix.models.index(target) if target in matrix.models else None
    rows = []
    try:
        mf_model = mf.MFModel.load(path)
        is_mf = True
    except ScorecastError:
        is_mf = False
    if is_mf:
        if model_index is None:
            raise InputError(f"{target!r} not in the checkpoint registry; the matrix "
                             f"factorization predictor cannot score unseen models")
        for t in task_names:
            rows.append((t, mf_model.predict(model_index, matrix.task_index(t))))
    else:
        net = ncf.load_ncf(path)
        record = model_records.get(target)
        if net.uses_factors and record is None:
            raise InputError(f"no factor record for {target!r} in {settings['models']}")
        if model_index is None and not net.uses_factors:
            raise InputError(f"{target!r} not in the registry; the id-only predictor "
                             f"cannot score unseen models")
        for t in task_names:
            rows.append((t, ncf.predict_ncf(net, model_index, matrix.task_index(t),
                                            record, task_records[t])))
    import csv

    with open(run.path / "report.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "task", "predicted_score"])
        for t, s in rows:
            w.writerow([target, t, format(s, ".10g")])
    for t, s in rows:
        run.log(f"{target} / {t}: {s:.4f}")
    run.finish()
    return 0


def cmd_eval(args) -> int:
    settings = resolve_settings(args)
    matrix, model_records, task_records = load_dataset(settings)
    run = RunDir(settings, matrix.content_hash())
    methods = tuple(tok.strip() for tok in str(settings["methods"]).split(",") if tok.strip())
    seeds = parse_seeds(settings["seeds"])
    run.log(f"evaluating {', '.join(methods)} over seeds {list(seeds)}")
    reports = analysis.run_benchmark_eval(
        matrix, model_records, task_records, methods=methods, seeds=seeds,
        config=train_config(settings),
        validation_fraction=settings["validation_fraction"])
    analysis.write_eval_csv(reports, seeds, run.path / "report.csv")
    analysis.write_per_seed_csv(reports, seeds, run.path / "plotdata" / "per_seed.csv")
    for method, r in reports.items():
        run.log(f"{method}: mse {r.mse:.6g} l1 {r.l1_mean:.6g} "
                f"accuracy {r.rank_accuracy_pct:.4g}% mae@2 {r.mae_at_2_pct:.4g}% "
                f"(n={r.n_eval})")
    run.finish()
    return 0


def cmd_scenario(args) -> int:
    settings = resolve_settings(args)
    if not settings["target"]:
        raise ConfigError("scenario needs --target <model>")
    matrix, model_records, task_records = load_dataset(settings)
    run = RunDir(settings, matrix.content_hash())
    seeds = parse_seeds(settings["seeds"])
    result = analysis.run_scenario(matrix, model_records, task_records,
                                   settings["target"], settings["scenario"],
                                   seeds=seeds, config=train_config(settings))
    analysis.write_scenario_csv(result, seeds, run.path / "report.csv",
                                run.path / "plotdata" / "scatter.csv")
    r = result.report
    run.log(f"{settings['scenario']} on {settings['target']}: mse {r.mse:.6g} "
            f"l1 {r.l1_mean:.6g} accuracy {r.rank_accuracy_pct:.4g}% "
            f"mae@2 {r.mae_at_2_pct:.4g}%")
    cov, tot = result.scaling_coverage
    run.log(f"scaling-curve coverage: {cov}/{tot} held-out entries")
    run.finish()
    return 0


def cmd_shapley(args) -> int:
    settings = resolve_settings(args)
    matrix, model_records, task_records = load_dataset(settings)
    run = RunDir(settings, matrix.content_hash())
    seed = settings["seed"]
    train, valid = split(matrix, SplitSpec(seed=seed,
                                           validation_fraction=settings["validation_fraction"]))
    if settings["checkpoint"]:
        net = ncf.load_ncf(settings["checkpoint"])
        run.log(f"loaded checkpoint {settings['checkpoint']}")
    else:
        run.log(f"no checkpoint given; training factor_enhanced on seed {seed}")
        net = ncf.train_ncf(train, model_records, task_records, "factor_enhanced",
                            train_config(settings))
    report = shapley.exact_shapley(net, valid, model_records, task_records)
    report.write_csv(run.path / "report.csv")
    report.write_plot_data(run.path / "plotdata" / "per_instance.csv")
    run.log(f"value convention: {report.convention}")
    run.log(f"efficiency check: |sum(phi) - (v(N) - v(empty))| = "
            f"{report.efficiency_gap:.3e} (per-instance max "
            f"{report.max_instance_efficiency_gap:.3e})")
    for name in report.ordering():
        k = report.factor_names.index(name)
        run.log(f"  {name}: mean {report.phi_mean[k]:+.6f} "
                f"(|.| {report.phi_abs_mean[k]:.6f}, std {report.phi_std[k]:.6f})")
    run.finish()
    return 0


def cmd_loo(args) -> int:
    settings = resolve_settings(args)
    matrix, model_records, task_records = load_dataset(settings)
    run = RunDir(settings, matrix.content_hash())
    seeds = parse_seeds(settings["seeds"])
    result = analysis.leave_one_out(
        matrix, model_records, task_records, axis=settings["axis"], seeds=seeds,
        config=train_config(settings), method=settings["method"],
        validation_fraction=settings["validation_fraction"],
        cut_height=settings["cut_height"], workers=settings["workers"])
    analysis.write_loo_files(result, run.path)
    run.log(f"leave-one-out over {len(result.masked_entities)} {result.axis} "
            f"({len(result.valid_entities)} with validation coverage, "
            f"{len(result.degenerate_columns)} degenerate columns)")
    for k, group in enumerate(result.clusters, start=1):
        run.log(f"cluster {k}: {', '.join(group)}")
    run.finish()
    return 0


def cmd_sparsity(args) -> int:
    settings = resolve_settings(args)
    matrix, model_records, task_records = load_dataset(settings)
    run = RunDir(settings, matrix.content_hash())
    seeds = parse_seeds(settings["seeds"])
    levels = parse_levels(settings["levels"])
    rows = analysis.sparsity_sweep(matrix, model_records, task_records, levels,
                                   seeds=seeds, config=train_config(settings),
                                   method=settings["method"],
                                   validation_fraction=settings["validation_fraction"])
    analysis.write_sparsity_csv(rows, run.path / "report.csv")
    analysis.write_sparsity_csv(rows, run.path / "plotdata" / "sparsity.csv")
    for r in rows:
        run.log(f"sparsity {r.sparsity:.3f}: l1 {r.l1_mean:.6g} "
                f"accuracy {r.accuracy_mean:.4g}% mae@2 {r.mae_at_2_mean:.4g}%")
    run.finish()
    return 0


def cmd_scaling(args) -> int:
    settings = resolve_settings(args)
    matrix, model_records, task_records = load_dataset(settings)
    run = RunDir(settings, matrix.content_hash())
    curves = scaling.fit_family_task_curves(matrix, model_records)
    import csv

    with open(run.path / "report.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "task", "w", "b", "residual", "n_points"])
        for c in curves:
            w.writerow([c.family, c.task, format(c.w, ".10g"), format(c.b, ".10g"),
                        format(c.residual, ".10g"), c.n_points])
    run.log(f"fitted {len(curves)} family/task sigmoid curves "
            f"(w in [{scaling.W_BOUNDS[0]}, {scaling.W_BOUNDS[1]}], "
            f"b in [{scaling.B_BOUNDS[0]}, {scaling.B_BOUNDS[1]}])")
    run.finish()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scorecast",
        description="Predict missing model-benchmark scores by collaborative "
                    "filtering; compare against per-family scaling curves; run "
                    "the analysis battery.")
    parser.add_argument("--version", action="version", version=f"scorecast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, method=True, seeds=True):
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--scores", help="scores.csv path (default: bundled data)")
        p.add_argument("--models", help="models.csv path")
        p.add_argument("--tasks-file", dest="tasks", help="tasks.csv path")
        p.add_argument("--out", help="run directory")
        p.add_argument("--latent-dim", dest="latent_dim", type=int)
        p.add_argument("--learning-rate", dest="learning_rate", type=float)
        p.add_argument("--iterations", type=int)
        p.add_argument("--l2-penalty", dest="l2_penalty", type=float)
        p.add_argument("--batch-size", dest="batch_size", type=int)
        p.add_argument("--factor-width", dest="factor_width", type=int)
        p.add_argument("--hidden-sizes", dest="hidden_sizes")
        p.add_argument("--validation-fraction", dest="validation_fraction", type=float)
        p.add_argument("--workers", type=int,
                       help="worker processes (default: SCORECAST_WORKERS or 1)")
        if method:
            p.add_argument("--method", choices=analysis.ALL_METHODS)
        if seeds:
            p.add_argument("--seed", type=int)
            p.add_argument("--seeds", help="count N (seeds 1..N) or comma list")

    p = sub.add_parser("validate", help="schema/linkage/range diagnostics")
    add_common(p, method=False, seeds=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("train", help="train one method, write a checkpoint")
    add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a model on tasks from a checkpoint")
    add_common(p, method=False)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--model", required=True, help="model identifier (may be new)")
    p.add_argument("--tasks", dest="task_list", help="'all' or comma list")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="benchmark-perspective table over random splits")
    add_common(p)
    p.add_argument("--methods", help="comma list from "
                                     f"{','.join(analysis.ALL_METHODS)}")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scenario", help="cold-start evaluation of one model "
                                        "(cpp0/cpp2) vs the scaling baseline")
    add_common(p)
    p.add_argument("--target", help="target model identifier")
    p.add_argument("--scenario", dest="scenario", choices=("cpp0", "cpp2"))
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("shapley", help="exact factor attribution on a "
                                       "factor-enhanced model")
    add_common(p, method=False)
    p.add_argument("--checkpoint")
    p.set_defaults(func=cmd_shapley)

    p = sub.add_parser("loo", help="leave-one-out influence matrix, correlation, "
                                   "clustering")
    add_common(p)
    p.add_argument("--axis", choices=("models", "tasks"))
    p.add_argument("--cut-height", dest="cut_height", type=float)
    p.set_defaults(func=cmd_loo)

    p = sub.add_parser("sparsity", help="metric sweep over training sparsity levels")
    add_common(p)
    p.add_argument("--levels", help="comma list of sparsity levels in (0,1)")
    p.set_defaults(func=cmd_sparsity)

    p = sub.add_parser("scaling", help="fit sigmoid curves for every (family, task)")
    add_common(p, method=False, seeds=False)
    p.set_defaults(func=cmd_scaling)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScorecastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
