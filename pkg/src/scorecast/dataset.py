"""Score-matrix ingestion, factor registries, splitting, and sparsity masking.

The data model is a sparse n x m matrix of normalized scores in [0, 1]:
rows are models, columns are tasks, and only a subset of cells is observed.
Each model carries 12 descriptive factors and each task 4, some of which may
be missing (stored as zero with a presence flag of False).

All containers here are immutable after construction and safe to share
across parallel experiment runs.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    LinkageError,
    ParseError,
    RangeError,
    ScenarioError,
    SchemaError,
    ValidationError,
)

CATEGORICAL = "categorical"
NUMERICAL = "numerical"

# Factor schema, in fixed column order. The third element of each numerical
# entry names the scalar transform applied before standardization: "log1p"
# for quantities spanning many orders of magnitude, "identity" otherwise.
MODEL_FACTORS = (
    ("family", CATEGORICAL, None),
    ("pretrain_tokens_b", NUMERICAL, "log1p"),
    ("params_m", NUMERICAL, "log1p"),
    ("gpu_hours", NUMERICAL, "log1p"),
    ("flops", NUMERICAL, "log1p"),
    ("context_window", CATEGORICAL, None),
    ("batch_size_m", CATEGORICAL, None),
    ("layers", NUMERICAL, "identity"),
    ("num_heads", NUMERICAL, "identity"),
    ("kv_size", NUMERICAL, "log1p"),
    ("bottleneck_activation_size", NUMERICAL, "log1p"),
    ("carbon_tco2eq", NUMERICAL, "log1p"),
)

TASK_FACTORS = (
    ("ability", CATEGORICAL, None),
    ("task_family", CATEGORICAL, None),
    ("output_format", CATEGORICAL, None),
    ("few_shot", CATEGORICAL, None),
)

MODEL_FACTOR_NAMES = tuple(name for name, _, _ in MODEL_FACTORS)
TASK_FACTOR_NAMES = tuple(name for name, _, _ in TASK_FACTORS)

SCORES_HEADER = ["model", "task", "score", "source"]
MODELS_HEADER = ["model"] + list(MODEL_FACTOR_NAMES)
TASKS_HEADER = ["task"] + list(TASK_FACTOR_NAMES)


@dataclass(frozen=True)
class ModelRecord:
    """Descriptive factors of one model; missing values are 0/"" with the
    factor name absent from ``present``."""

    identifier: str
    family: str = ""
    pretrain_tokens_b: float = 0.0
    params_m: float = 0.0
    gpu_hours: float = 0.0
    flops: float = 0.0
    context_window: str = ""
    batch_size_m: str = ""
    layers: float = 0.0
    num_heads: float = 0.0
    kv_size: float = 0.0
    bottleneck_activation_size: float = 0.0
    carbon_tco2eq: float = 0.0
    present: frozenset[str] = field(default_factory=frozenset)

    def value(self, factor: str):
        if factor not in MODEL_FACTOR_NAMES:
            raise KeyError(factor)
        return getattr(self, factor)

    def is_present(self, factor: str) -> bool:
        return factor in self.present


@dataclass(frozen=True)
class TaskRecord:
    """Descriptive factors of one task; all four are categorical."""

    identifier: str
    ability: str = ""
    task_family: str = ""
    output_format: str = ""
    few_shot: str = ""
    present: frozenset[str] = field(default_factory=frozenset)

    def value(self, factor: str):
        if factor not in TASK_FACTOR_NAMES:
            raise KeyError(factor)
        return getattr(self, factor)

    def is_present(self, factor: str) -> bool:
        return factor in self.present


@dataclass(frozen=True)
class ScoreMatrix:
    """Sparse collection of (model_index, task_index, score) observations.

    Registries keep first-appearance order so that seeded experiments always
    see the same index assignment. Entries are unique per (model, task).
    """

    models: tuple[str, ...]
    tasks: tuple[str, ...]
    entries: tuple[tuple[int, int, float, str], ...]

    def __post_init__(self):
        n, m = len(self.models), len(self.tasks)
        seen = set()
        for u, i, s, _ in self.entries:
            if not (0 <= u < n and 0 <= i < m):
                raise ValidationError(f"entry ({u},{i}) outside registry bounds {n}x{m}")
            if not (0.0 <= s <= 1.0):
                raise ValidationError(f"score {s} for ({self.models[u]},{self.tasks[i]}) outside [0,1]")
            if (u, i) in seen:
                raise ValidationError(f"duplicate entry for ({self.models[u]},{self.tasks[i]})")
            seen.add((u, i))

    @property
    def n_models(self) -> int:
        return len(self.models)

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def density(self) -> float:
        return len(self.entries) / (self.n_models * self.n_tasks)

    @property
    def sparsity(self) -> float:
        return 1.0 - self.density

    @cached_property
    def score_of(self) -> dict[tuple[int, int], float]:
        return {(u, i): s for u, i, s, _ in self.entries}

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(model_idx, task_idx, score) columns as numpy arrays."""
        if not self.entries:
            z = np.zeros(0)
            return z.astype(np.int64), z.astype(np.int64), z
        u, i, s = zip(*[(e[0], e[1], e[2]) for e in self.entries])
        return np.asarray(u, np.int64), np.asarray(i, np.int64), np.asarray(s, np.float64)

    def model_index(self, name: str) -> int:
        try:
            return self.models.index(name)
        except ValueError:
            raise LinkageError(f"unknown model {name!r}") from None

    def task_index(self, name: str) -> int:
        try:
            return self.tasks.index(name)
        except ValueError:
            raise LinkageError(f"unknown task {name!r}") from None

    def entries_for_model(self, u: int) -> tuple[tuple[int, int, float, str], ...]:
        return tuple(e for e in self.entries if e[0] == u)

    def entries_for_task(self, i: int) -> tuple[tuple[int, int, float, str], ...]:
        return tuple(e for e in self.entries if e[1] == i)

    def with_entries(self, entries) -> "ScoreMatrix":
        """New matrix sharing these registries (split/mask helper)."""
        return ScoreMatrix(self.models, self.tasks, tuple(entries))

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for name in self.models:
            h.update(name.encode())
            h.update(b"\x00")
        h.update(b"\x01")
        for name in self.tasks:
            h.update(name.encode())
            h.update(b"\x00")
        h.update(b"\x01")
        for u, i, s, tag in self.entries:
            h.update(f"{u},{i},{s!r},{tag}".encode())
            h.update(b"\x00")
        return h.hexdigest()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(SCORES_HEADER)
            for u, i, s, tag in self.entries:
                w.writerow([self.models[u], self.tasks[i], format(s, ".17g"), tag])


@dataclass(frozen=True)
class SplitSpec:
    """How to carve observed entries into train and validation.

    scenario "random" holds out a uniform validation_fraction sample;
    "cpp0" holds out every entry of target_model (zero prior observations);
    "cpp2" keeps exactly two random entries of target_model in train and
    holds out the rest.
    """

    seed: int
    validation_fraction: float = 0.05
    scenario: str = "random"
    target_model: str | None = None

    def __post_init__(self):
        if self.scenario not in ("random", "cpp0", "cpp2"):
            raise ScenarioError(f"unknown scenario {self.scenario!r}")
        if self.scenario == "random" and not (0.0 < self.validation_fraction < 1.0):
            raise ScenarioError(f"validation_fraction {self.validation_fraction} outside (0,1)")
        if self.scenario in ("cpp0", "cpp2") and not self.target_model:
            raise ScenarioError(f"scenario {self.scenario} needs a target model")


def _read_rows(path, expected_header):
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: file not found")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if header != expected_header:
            unknown = [h for h in header if h not in expected_header]
            missing = [h for h in expected_header if h not in header]
            raise SchemaError(
                f"{path}: header mismatch (unknown columns {unknown}, missing {missing}, "
                f"expected {expected_header})"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            rows.append((lineno, [c.strip() for c in row]))
    return rows


def load_scores(path, warn=None) -> ScoreMatrix:
    """Load a scores.csv file (header model,task,score,source).

    Registry order is first-appearance order. Duplicate (model, task) rows
    keep the first occurrence; later ones are reported through ``warn``.
    """
    rows = _read_rows(path, SCORES_HEADER)
    if not rows:
        raise ParseError(f"{path}: no score rows")
    models: list[str] = []
    tasks: list[str] = []
    model_idx: dict[str, int] = {}
    task_idx: dict[str, int] = {}
    entries = []
    seen = set()
    for lineno, row in rows:
        if len(row) < 3:
            raise ParseError(f"{path}:{lineno}: expected at least model,task,score")
        name, task, score_text = row[0], row[1], row[2]
        tag = row[3] if len(row) > 3 else ""
        if not name or not task:
            raise ParseError(f"{path}:{lineno}: empty model or task identifier")
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: malformed score {score_text!r}") from None
        if not (0.0 <= score <= 1.0):
            raise ValidationError(
                f"{path}:{lineno}: score {score} for ({name}, {task}) outside [0,1]"
            )
        if name not in model_idx:
            model_idx[name] = len(models)
            models.append(name)
        if task not in task_idx:
            task_idx[task] = len(tasks)
            tasks.append(task)
        key = (model_idx[name], task_idx[task])
        if key in seen:
            if warn is not None:
                warn(f"{path}:{lineno}: duplicate entry for ({name}, {task}), keeping first")
            continue
        seen.add(key)
        entries.append((key[0], key[1], score, tag))
    return ScoreMatrix(tuple(models), tuple(tasks), tuple(entries))


def _parse_factor_rows(path, header, factor_specs, record_cls):
    rows = _read_rows(path, header)
    records: dict[str, object] = {}
    for lineno, row in rows:
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
        identifier = row[0]
        if not identifier:
            raise ParseError(f"{path}:{lineno}: empty identifier")
        if identifier in records:
            raise LinkageError(f"{path}:{lineno}: duplicate identifier {identifier!r}")
        values = {}
        present = set()
        for cell, (name, kind, _) in zip(row[1:], factor_specs):
            if cell == "":
                values[name] = 0.0 if kind == NUMERICAL else ""
                continue
            if kind == NUMERICAL:
                try:
                    x = float(cell)
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: malformed number {cell!r} in {name}") from None
                if x < 0:
                    raise ValidationError(f"{path}:{lineno}: negative {name} = {x}")
                values[name] = x
            else:
                values[name] = cell
            present.add(name)
        records[identifier] = record_cls(identifier=identifier, present=frozenset(present), **values)
    return records


def load_model_factors(path) -> dict[str, ModelRecord]:
    return _parse_factor_rows(path, MODELS_HEADER, MODEL_FACTORS, ModelRecord)


def load_task_factors(path) -> dict[str, TaskRecord]:
    return _parse_factor_rows(path, TASKS_HEADER, TASK_FACTORS, TaskRecord)


def check_linkage(matrix: ScoreMatrix, model_records, task_records) -> None:
    """Every model/task referenced by scores must have a factor record."""
    missing_models = [m for m in matrix.models if m not in model_records]
    missing_tasks = [t for t in matrix.tasks if t not in task_records]
    if missing_models or missing_tasks:
        raise LinkageError(
            f"score entries reference identifiers without factor records: "
            f"models {missing_models}, tasks {missing_tasks}"
        )


def split(matrix: ScoreMatrix, spec: SplitSpec) -> tuple[ScoreMatrix, ScoreMatrix]:
    """Partition observed entries into (train, valid) for the requested
    scenario.

    Deterministic for a fixed (matrix, spec): the sampling stream depends
    only on spec.seed.
    """
    if not matrix.entries:
        raise ScenarioError("cannot split an empty score matrix")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    entries = matrix.entries
    if spec.scenario == "random":
        n_valid = math.ceil(spec.validation_fraction * len(entries))
        order = rng.permutation(len(entries))
        valid_pos = set(order[:n_valid].tolist())
        train = [e for k, e in enumerate(entries) if k not in valid_pos]
        valid = [e for k, e in enumerate(entries) if k in valid_pos]
        return matrix.with_entries(train), matrix.with_entries(valid)

    target = matrix.model_index(spec.target_model)
    target_pos = [k for k, e in enumerate(entries) if e[0] == target]
    if not target_pos:
        raise ScenarioError(f"target model {spec.target_model!r} has no observed entries")
    if spec.scenario == "cpp0":
        keep_in_train: set[int] = set()
    else:
        if len(target_pos) < 3:
            raise ScenarioError(
                f"cpp2 needs >=3 observed entries for {spec.target_model!r}, "
                f"found {len(target_pos)}"
            )
        order = rng.permutation(len(target_pos))
        keep_in_train = {target_pos[j] for j in order[:2].tolist()}
    train = [e for k, e in enumerate(entries) if e[0] != target or k in keep_in_train]
    valid = [e for k, e in enumerate(entries) if e[0] == target and k not in keep_in_train]
    return matrix.with_entries(train), matrix.with_entries(valid)


def mask_to_sparsity(train: ScoreMatrix, target_sparsity: float, seed: int) -> ScoreMatrix:
    """Uniformly drop train entries until grid sparsity reaches the target.

    Removal is minimal: exactly enough entries are dropped so that
    (n*m - |entries|) / (n*m) >= target_sparsity. Validation entries are
    untouched by construction (they are not part of ``train``).
    """
    cells = train.n_models * train.n_tasks
    missing = cells - len(train.entries)
    current = missing / cells
    if target_sparsity < current - 1e-12:
        raise RangeError(
            f"target sparsity {target_sparsity:.4f} below current {current:.4f}"
        )
    if target_sparsity >= 1.0:
        raise RangeError("target sparsity must be < 1")
    n_remove = max(0, math.ceil(target_sparsity * cells - 1e-9) - missing)
    if n_remove == 0:
        return train
    if n_remove >= len(train.entries):
        raise RangeError("target sparsity would remove every training entry")
    rng = np.random.Generator(np.random.PCG64(seed))
    drop = set(rng.permutation(len(train.entries))[:n_remove].tolist())
    return train.with_entries(e for k, e in enumerate(train.entries) if k not in drop)


def normalize_per_task(matrix: ScoreMatrix) -> ScoreMatrix:
    """Optional min-max rescaling of each task column onto [0, 1].

    Intended for ingesting raw metric values; the bundled data is already
    normalized. Constant columns map to 0.5.
    """
    lo: dict[int, float] = {}
    hi: dict[int, float] = {}
    for u, i, s, _ in matrix.entries:
        lo[i] = min(lo.get(i, s), s)
        hi[i] = max(hi.get(i, s), s)
    out = []
    for u, i, s, tag in matrix.entries:
        span = hi[i] - lo[i]
        out.append((u, i, (s - lo[i]) / span if span > 0 else 0.5, tag))
    return matrix.with_entries(out)


def bundled_path(name: str) -> Path:
    """Path of a bundled data file (scores.csv, models.csv, tasks.csv)."""
    return Path(str(resources.files("scorecast") / "data" / name))


def load_bundled() -> tuple[ScoreMatrix, dict[str, ModelRecord], dict[str, TaskRecord]]:
    matrix = load_scores(bundled_path("scores.csv"))
    model_records = load_model_factors(bundled_path("models.csv"))
    task_records = load_task_factors(bundled_path("tasks.csv"))
    check_linkage(matrix, model_records, task_records)
    return matrix, model_records, task_records
