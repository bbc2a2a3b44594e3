"""Neural collaborative filtering with optional descriptive-factor inputs.

Identity embeddings for models and tasks, plus (per variant) factor
embeddings, are concatenated and passed through a small MLP with
rectified-linear hidden layers and a sigmoid output. Three variants:

  id_only          MLP(p_u, q_i)
  factor_enhanced  MLP(p_u, q_i, factors(model), factors(task))
  factor_only      MLP(factors(model), factors(task))

Factor handling: categorical factors index an embedding table (one row per
category seen when the encoder was fitted, plus a shared out-of-vocabulary
fallback row); numerical factors are transformed (log1p or identity),
standardized against the fitted registry, and linearly projected to the
embedding width. A missing factor contributes an exact zero slice and
receives no gradient.

Everything is trained by mini-batch SGD with handwritten backpropagation;
training is bit-reproducible from the seed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import (
    CATEGORICAL,
    MODEL_FACTORS,
    NUMERICAL,
    TASK_FACTORS,
    ScoreMatrix,
)
from .errors import (
    CheckpointError,
    ConfigError,
    InputError,
    ScorecastError,
    TrainingError,
    ValidationError,
)
from .mf import LOSS_SAMPLE_EVERY, TrainConfig

VARIANTS = ("id_only", "factor_enhanced", "factor_only")

_TRANSFORMS = {"log1p": np.log1p, "identity": lambda x: x}


@dataclass
class FactorEncoder:
    """Maps one entity type's factor record to a concatenated embedding.

    Owns the learned parameters: ``proj`` holds one projection vector per
    numerical factor, ``tables`` stacks every categorical factor's embedding
    table (rows addressed through ``offsets``; the last row of each factor's
    range is the out-of-vocabulary fallback).
    """

    specs: tuple
    width: int
    mu: np.ndarray
    sd: np.ndarray
    vocabs: tuple[dict[str, int], ...]
    proj: np.ndarray
    tables: np.ndarray
    offsets: np.ndarray

    @property
    def numerical_names(self) -> tuple[str, ...]:
        return tuple(n for n, k, _ in self.specs if k == NUMERICAL)

    @property
    def categorical_names(self) -> tuple[str, ...]:
        return tuple(n for n, k, _ in self.specs if k == CATEGORICAL)

    @property
    def total_width(self) -> int:
        return len(self.specs) * self.width

    def inputs_for(self, record) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(standardized numericals, categorical row ids, categorical mask)."""
        z = np.zeros(len(self.numerical_names))
        rows = np.zeros(len(self.categorical_names), dtype=np.int64)
        mask = np.zeros(len(self.categorical_names))
        g = c = 0
        for name, kind, transform in self.specs:
            if kind == NUMERICAL:
                if record.is_present(name):
                    u = _TRANSFORMS[transform](float(record.value(name)))
                    z[g] = (u - self.mu[g]) / self.sd[g]
                g += 1
            else:
                vocab = self.vocabs[c]
                if record.is_present(name):
                    rows[c] = self.offsets[c] + vocab.get(str(record.value(name)), len(vocab))
                    mask[c] = 1.0
                else:
                    rows[c] = self.offsets[c] + len(vocab)
                c += 1
        return z, rows, mask

    def encode(self, record) -> np.ndarray:
        """Concatenated per-factor embeddings in schema order."""
        z, rows, mask = self.inputs_for(record)
        out = np.zeros(self.total_width)
        g = c = 0
        for j, (_, kind, _) in enumerate(self.specs):
            sl = slice(j * self.width, (j + 1) * self.width)
            if kind == NUMERICAL:
                out[sl] = z[g] * self.proj[g]
                g += 1
            else:
                out[sl] = self.tables[rows[c]] * mask[c]
                c += 1
        return out

    def schema_descriptor(self) -> dict:
        return {
            "specs": [[n, k, t] for n, k, t in self.specs],
            "width": self.width,
            "mu": [repr(float(v)) for v in self.mu],
            "sd": [repr(float(v)) for v in self.sd],
            "vocabs": [sorted(v.items()) for v in self.vocabs],
        }


def fit_encoder(specs, records, width: int, rng: np.random.Generator) -> FactorEncoder:
    """Fit vocabularies and standardization stats on a factor registry and
    initialize the learned parameters."""
    num_specs = [(n, t) for n, k, t in specs if k == NUMERICAL]
    cat_names = [n for n, k, _ in specs if k == CATEGORICAL]
    mu = np.zeros(len(num_specs))
    sd = np.ones(len(num_specs))
    for g, (name, transform) in enumerate(num_specs):
        vals = [_TRANSFORMS[transform](float(r.value(name))) for r in records if r.is_present(name)]
        if vals:
            mu[g] = float(np.mean(vals))
            s = float(np.std(vals))
            sd[g] = s if s > 1e-12 else 1.0
    vocabs = []
    offsets = []
    total = 0
    for name in cat_names:
        cats = sorted({str(r.value(name)) for r in records if r.is_present(name)})
        vocabs.append({cat: k for k, cat in enumerate(cats)})
        offsets.append(total)
        total += len(cats) + 1  # +1 out-of-vocabulary row
    proj = rng.normal(0.0, 0.1, size=(len(num_specs), width))
    tables = rng.normal(0.0, 0.1, size=(total, width))
    return FactorEncoder(
        specs=tuple(specs), width=width, mu=mu, sd=sd, vocabs=tuple(vocabs),
        proj=proj, tables=tables, offsets=np.asarray(offsets, dtype=np.int64),
    )


def encode_factors(record, encoder: FactorEncoder) -> np.ndarray:
    return encoder.encode(record)


class _Layout:
    """Column bookkeeping for the concatenated MLP input."""

    def __init__(self, variant: str, d: int,
                 model_encoder: FactorEncoder | None,
                 task_encoder: FactorEncoder | None):
        self.variant = variant
        self.d = d
        pos = 0
        self.id_slices: tuple[slice, slice] | None = None
        if variant in ("id_only", "factor_enhanced"):
            self.id_slices = (slice(0, d), slice(d, 2 * d))
            pos = 2 * d
        self.factor_slices: dict[str, slice] = {}
        self.num_cols: dict[str, np.ndarray] = {}
        self.cat_cols: dict[str, np.ndarray] = {}
        if variant in ("factor_enhanced", "factor_only"):
            for side, enc in (("model", model_encoder), ("task", task_encoder)):
                w = enc.width
                num_cols, cat_cols = [], []
                for j, (name, kind, _) in enumerate(enc.specs):
                    start = pos + j * w
                    self.factor_slices[name] = slice(start, start + w)
                    (num_cols if kind == NUMERICAL else cat_cols).extend(range(start, start + w))
                self.num_cols[side] = np.asarray(num_cols, dtype=np.int64)
                self.cat_cols[side] = np.asarray(cat_cols, dtype=np.int64)
                pos += enc.total_width
        self.input_width = pos

    def factor_names(self) -> tuple[str, ...]:
        return tuple(self.factor_slices)


@dataclass
class NCFModel:
    variant: str
    P: np.ndarray
    Q: np.ndarray
    model_encoder: FactorEncoder | None
    task_encoder: FactorEncoder | None
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    masked_factors: frozenset[str] = frozenset()
    loss_trace: list[tuple[int, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        self._layout = _Layout(self.variant, self.P.shape[1],
                               self.model_encoder, self.task_encoder)
        if self.weights[0].shape[0] != self._layout.input_width:
            raise ValidationError(
                f"first MLP layer expects {self.weights[0].shape[0]} inputs, "
                f"layout provides {self._layout.input_width}"
            )

    @property
    def layout(self) -> _Layout:
        return self._layout

    @property
    def uses_factors(self) -> bool:
        return self.variant in ("factor_enhanced", "factor_only")

    @property
    def uses_ids(self) -> bool:
        return self.variant in ("id_only", "factor_enhanced")

    def masked(self, factors) -> "NCFModel":
        """Read-only view with the given factors' contributions zeroed.

        Shares every parameter array with the original; only the mask set
        differs, so the underlying trained model is never mutated.
        """
        if not self.uses_factors:
            raise InputError(f"variant {self.variant!r} has no factor inputs to mask")
        factors = frozenset(factors)
        unknown = factors - set(self._layout.factor_names())
        if unknown:
            raise InputError(f"factors not in schema: {sorted(unknown)}")
        return replace(self, masked_factors=self.masked_factors | factors)

    def schema_hash(self) -> str:
        desc = {
            "variant": self.variant,
            "d": int(self.P.shape[1]),
            "hidden": [int(w.shape[1]) for w in self.weights[:-1]],
            "model_encoder": self.model_encoder.schema_descriptor() if self.model_encoder else None,
            "task_encoder": self.task_encoder.schema_descriptor() if self.task_encoder else None,
        }
        blob = json.dumps(desc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    # -- assembling MLP inputs ------------------------------------------------

    def _mask_multipliers(self):
        """Per-side numerical/categorical multipliers implementing the mask."""
        mult = {}
        for side, enc in (("model", self.model_encoder), ("task", self.task_encoder)):
            if enc is None:
                continue
            nm = np.ones(len(enc.numerical_names))
            cm = np.ones(len(enc.categorical_names))
            for g, name in enumerate(enc.numerical_names):
                if name in self.masked_factors:
                    nm[g] = 0.0
            for c, name in enumerate(enc.categorical_names):
                if name in self.masked_factors:
                    cm[c] = 0.0
            mult[side] = (nm, cm)
        return mult

    def batch_inputs(self, u, i, reg: "RegistryInputs | None" = None,
                     model_inputs=None, task_inputs=None):
        """Concatenated MLP inputs for batches of (model, task) indices.

        Registry entities come through ``reg``; ad-hoc entities (new models)
        through explicit (z, rows, mask) triples. Returns the input matrix
        plus the categorical gather bookkeeping needed for backprop.
        """
        u = np.atleast_1d(np.asarray(u))
        i = np.atleast_1d(np.asarray(i, dtype=np.int64))
        B = max(len(u), len(i))
        lay = self._layout
        X = np.zeros((B, lay.input_width))
        if self.uses_ids:
            uid = np.zeros(B, dtype=np.int64) if u.dtype == object else u
            if u.dtype == object:  # None means "unknown model": zero id vector
                known = np.array([x is not None for x in u])
                uid[known] = np.array([x for x in u if x is not None], dtype=np.int64)
                X[known, lay.id_slices[0]] = self.P[uid[known]]
            else:
                X[:, lay.id_slices[0]] = self.P[u]
            X[:, lay.id_slices[1]] = self.Q[i]
        cache = {}
        if self.uses_factors:
            mult = self._mask_multipliers()
            for side, enc, idx, adhoc in (
                ("model", self.model_encoder, u, model_inputs),
                ("task", self.task_encoder, i, task_inputs),
            ):
                if adhoc is not None:
                    z, rows, mask = adhoc
                    z = np.broadcast_to(z, (B, len(z))) if np.ndim(z) == 1 else z
                    rows = np.broadcast_to(rows, (B, len(rows))) if np.ndim(rows) == 1 else rows
                    mask = np.broadcast_to(mask, (B, len(mask))) if np.ndim(mask) == 1 else mask
                else:
                    zs, rs, ms = reg.side(side)
                    z, rows, mask = zs[idx], rs[idx], ms[idx]
                nm, cm = mult[side]
                z = z * nm
                mask = mask * cm
                if len(enc.numerical_names):
                    X[:, lay.num_cols[side]] = (z[:, :, None] * enc.proj[None]).reshape(B, -1)
                if len(enc.categorical_names):
                    X[:, lay.cat_cols[side]] = (enc.tables[rows] * mask[:, :, None]).reshape(B, -1)
                cache[side] = (z, rows, mask)
        return X, cache

    def mlp_forward(self, X: np.ndarray, need_cache: bool = False):
        """sigmoid(MLP(X)); optionally returns hidden activations for backprop."""
        h = X
        hs = [X]
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ W + b, 0.0)
            if need_cache:
                hs.append(h)
        z = h @ self.weights[-1] + self.biases[-1]
        s = 1.0 / (1.0 + np.exp(-z[:, 0]))
        return (s, hs) if need_cache else s


@dataclass
class RegistryInputs:
    """Precomputed encoder inputs for every registry entity (training cache)."""

    Zm: np.ndarray
    Rm: np.ndarray
    Mm: np.ndarray
    Zt: np.ndarray
    Rt: np.ndarray
    Mt: np.ndarray

    def side(self, which: str):
        if which == "model":
            return self.Zm, self.Rm, self.Mm
        return self.Zt, self.Rt, self.Mt


def build_registry_inputs(model: NCFModel, matrix: ScoreMatrix,
                          model_records, task_records) -> RegistryInputs:
    def gather(encoder, names, records, kind):
        if encoder is None:
            return (np.zeros((len(names), 0)), np.zeros((len(names), 0), dtype=np.int64),
                    np.zeros((len(names), 0)))
        Z = np.zeros((len(names), len(encoder.numerical_names)))
        R = np.zeros((len(names), len(encoder.categorical_names)), dtype=np.int64)
        M = np.zeros((len(names), len(encoder.categorical_names)))
        for k, name in enumerate(names):
            if name not in records:
                raise InputError(f"no factor record for {kind} {name!r}")
            Z[k], R[k], M[k] = encoder.inputs_for(records[name])
        return Z, R, M

    Zm, Rm, Mm = gather(model.model_encoder, matrix.models, model_records or {}, "model")
    Zt, Rt, Mt = gather(model.task_encoder, matrix.tasks, task_records or {}, "task")
    return RegistryInputs(Zm, Rm, Mm, Zt, Rt, Mt)


def init_ncf(n: int, m: int, variant: str, config: TrainConfig,
             model_records=None, task_records=None) -> NCFModel:
    """Build an untrained model; factor encoders are fitted on the supplied
    registries for the factor variants."""
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    rng = np.random.Generator(np.random.PCG64(config.seed))
    d = config.latent_dim
    P = rng.normal(0.0, 0.1, size=(n, d))
    Q = rng.normal(0.0, 0.1, size=(m, d))
    model_encoder = task_encoder = None
    if variant in ("factor_enhanced", "factor_only"):
        if not model_records or not task_records:
            raise InputError(f"variant {variant!r} needs model and task factor records")
        model_encoder = fit_encoder(MODEL_FACTORS, list(model_records.values()),
                                    config.factor_width, rng)
        task_encoder = fit_encoder(TASK_FACTORS, list(task_records.values()),
                                   config.factor_width, rng)
    lay = _Layout(variant, d, model_encoder, task_encoder)
    sizes = [lay.input_width, *config.hidden_sizes, 1]
    weights = [rng.normal(0.0, math.sqrt(2.0 / sizes[k]), size=(sizes[k], sizes[k + 1]))
               for k in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[k + 1]) for k in range(len(sizes) - 1)]
    return NCFModel(variant=variant, P=P, Q=Q, model_encoder=model_encoder,
                    task_encoder=task_encoder, weights=weights, biases=biases)


def batch_loss_and_grads(model: NCFModel, reg: RegistryInputs,
                         u: np.ndarray, i: np.ndarray, r: np.ndarray):
    """Mean squared error over the batch and gradients for every parameter
    class. Embedding-table gradients come back as (rows, per-row grad) pairs
    so the caller can scatter-update."""
    X, cache = model.batch_inputs(u, i, reg=reg)
    s, hs = model.mlp_forward(X, need_cache=True)
    diff = s - r
    loss = float(np.mean(diff * diff))
    B = len(r)
    dz = (2.0 * diff / B) * s * (1.0 - s)
    grads_W = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    delta = dz[:, None]
    for k in range(len(model.weights) - 1, -1, -1):
        grads_W[k] = hs[k].T @ delta
        grads_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ model.weights[k].T) * (hs[k] > 0)
    dX = delta @ model.weights[0].T
    lay = model.layout
    out = {"W": grads_W, "b": grads_b, "loss": loss}
    if model.uses_ids:
        out["P"] = (u, dX[:, lay.id_slices[0]])
        out["Q"] = (i, dX[:, lay.id_slices[1]])
    if model.uses_factors:
        for side, enc, idx in (("model", model.model_encoder, u),
                               ("task", model.task_encoder, i)):
            z, rows, mask = cache[side]
            if len(enc.numerical_names):
                dnum = dX[:, lay.num_cols[side]].reshape(B, len(enc.numerical_names), enc.width)
                out[f"proj_{side}"] = np.einsum("bg,bgw->gw", z, dnum)
            if len(enc.categorical_names):
                dcat = dX[:, lay.cat_cols[side]].reshape(B, len(enc.categorical_names), enc.width)
                out[f"tables_{side}"] = (rows, dcat * mask[:, :, None])
    return out


def apply_sgd_step(model: NCFModel, reg: RegistryInputs,
                   u: np.ndarray, i: np.ndarray, r: np.ndarray,
                   lr: float, lam: float) -> None:
    """One mini-batch SGD update, numpy reference path."""
    g = batch_loss_and_grads(model, reg, u, i, r)
    for k, (W, b) in enumerate(zip(model.weights, model.biases)):
        gw = g["W"][k]
        if lam:
            gw = gw + 2.0 * lam * W
        W -= lr * gw
        b -= lr * g["b"][k]
    if model.uses_ids:
        rows, dp = g["P"]
        if lam:
            dp = dp + 2.0 * lam * model.P[rows]
        np.add.at(model.P, rows, -lr * dp)
        rows, dq = g["Q"]
        if lam:
            dq = dq + 2.0 * lam * model.Q[rows]
        np.add.at(model.Q, rows, -lr * dq)
    if model.uses_factors:
        for side, enc in (("model", model.model_encoder), ("task", model.task_encoder)):
            key = f"proj_{side}"
            if key in g:
                gp = g[key]
                if lam:
                    gp = gp + 2.0 * lam * enc.proj
                enc.proj -= lr * gp
            key = f"tables_{side}"
            if key in g:
                rows, dt = g[key]
                np.add.at(enc.tables, rows.ravel(), -lr * dt.reshape(-1, enc.width))


def train_ncf(train: ScoreMatrix, model_records, task_records,
              variant: str, config: TrainConfig,
              use_kernel: bool | None = None) -> NCFModel:
    """Mini-batch SGD on the mean squared error, config.iterations steps.

    Deterministic for fixed inputs and seed: initialization and the batch
    sampling stream both derive from config.seed, and the compiled inner
    loop (used when numba is available; pass use_kernel=False to force the
    numpy path) implements the same step as apply_sgd_step. Raises
    TrainingError with the step index if the loss stops being finite.
    """
    from . import _kernel

    if not train.entries:
        raise ValidationError("training matrix is empty")
    if use_kernel is None:
        use_kernel = _kernel.HAVE_NUMBA
    model = init_ncf(train.n_models, train.n_tasks, variant, config,
                     model_records, task_records)
    reg = build_registry_inputs(model, train, model_records, task_records)
    us, its, rs = train.arrays
    rng = np.random.Generator(np.random.PCG64(config.seed + 1))
    lr = config.learning_rate
    lam = config.l2_penalty
    n_entries = len(rs)
    done = 0
    while done < config.iterations:
        chunk = min(LOSS_SAMPLE_EVERY, config.iterations - done)
        picks = rng.integers(0, n_entries, size=(chunk, config.batch_size))
        if use_kernel:
            _kernel.run_chunk(model, reg, us, its, rs, picks, lr, lam)
        else:
            for row in picks:
                apply_sgd_step(model, reg, us[row], its[row], rs[row], lr, lam)
        done += chunk
        loss = training_mse_ncf(model, reg, us, its, rs)
        if not np.isfinite(loss):
            raise TrainingError(f"training loss became non-finite at step {done}")
        model.loss_trace.append((done, loss))
    return model


def training_mse_ncf(model: NCFModel, reg: RegistryInputs, us, its, rs) -> float:
    X, _ = model.batch_inputs(us, its, reg=reg)
    s = model.mlp_forward(X)
    return float(np.mean((s - rs) ** 2))


def forward(model: NCFModel, model_index, task_index,
            model_record=None, task_record=None) -> float:
    """Predicted score in (0, 1) for one (model, task) pair.

    Factor variants require both records. model_index may be None for a
    model outside the registry (its identity embedding is the zero vector);
    such a model must then be described by its record.
    """
    if model.uses_factors and (model_record is None or task_record is None):
        raise InputError(f"variant {model.variant!r} requires model and task records")
    if model_index is None and (not model.uses_factors or model_record is None):
        raise InputError("a model outside the registry needs a factor record")
    model_inputs = task_inputs = None
    if model.uses_factors:
        model_inputs = model.model_encoder.inputs_for(model_record)
        task_inputs = model.task_encoder.inputs_for(task_record)
    u = np.array([model_index], dtype=object if model_index is None else np.int64)
    X, _ = model.batch_inputs(u, np.array([task_index]),
                              model_inputs=model_inputs, task_inputs=task_inputs)
    return float(model.mlp_forward(X)[0])


def predict_ncf(model: NCFModel, model_index, task_index,
                model_record=None, task_record=None) -> float:
    """Public inference entry point; see forward."""
    return forward(model, model_index, task_index, model_record, task_record)


def predict_entries(model: NCFModel, entries, matrix: ScoreMatrix,
                    model_records=None, task_records=None) -> dict[tuple[int, int], float]:
    """Batched predictions for (model_index, task_index) entry tuples."""
    if model.uses_factors and (model_records is None or task_records is None):
        raise InputError(f"variant {model.variant!r} requires factor records")
    reg = build_registry_inputs(model, matrix, model_records, task_records)
    u = np.array([e[0] for e in entries], dtype=np.int64)
    i = np.array([e[1] for e in entries], dtype=np.int64)
    if len(u) == 0:
        return {}
    X, _ = model.batch_inputs(u, i, reg=reg)
    s = model.mlp_forward(X)
    return {(int(a), int(b)): float(v) for a, b, v in zip(u, i, s)}


# -- checkpointing -----------------------------------------------------------


def save_ncf(model: NCFModel, path) -> None:
    payload = {
        "kind": "ncf",
        "variant": model.variant,
        "schema_hash": model.schema_hash(),
        "P": model.P,
        "Q": model.Q,
        "n_layers": len(model.weights),
    }
    for k, (W, b) in enumerate(zip(model.weights, model.biases)):
        payload[f"W{k}"] = W
        payload[f"b{k}"] = b
    for side, enc in (("model", model.model_encoder), ("task", model.task_encoder)):
        if enc is None:
            continue
        payload[f"{side}_meta"] = json.dumps(enc.schema_descriptor())
        payload[f"{side}_proj"] = enc.proj
        payload[f"{side}_tables"] = enc.tables
        payload[f"{side}_offsets"] = enc.offsets
    np.savez(path, **payload)


def _encoder_from_meta(meta: str, proj, tables, offsets) -> FactorEncoder:
    d = json.loads(meta)
    return FactorEncoder(
        specs=tuple(tuple(s) for s in d["specs"]),
        width=int(d["width"]),
        mu=np.array([float(v) for v in d["mu"]]),
        sd=np.array([float(v) for v in d["sd"]]),
        vocabs=tuple({k: int(v) for k, v in vocab} for vocab in d["vocabs"]),
        proj=proj, tables=tables, offsets=offsets,
    )


def load_ncf(path) -> NCFModel:
    """Load a checkpoint; refuses one whose stored schema hash does not match
    the schema reconstructed from its own metadata."""
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"{path}: cannot read checkpoint ({exc})") from exc
    with archive as z:
        if "kind" not in z.files or str(z["kind"]) != "ncf":
            raise CheckpointError(f"{path}: not a neural collaborative filtering checkpoint")
        variant = str(z["variant"])
        stored_hash = str(z["schema_hash"])
        n_layers = int(z["n_layers"])
        weights = [z[f"W{k}"] for k in range(n_layers)]
        biases = [z[f"b{k}"] for k in range(n_layers)]
        encoders = {}
        for side in ("model", "task"):
            if f"{side}_meta" in z.files:
                encoders[side] = _encoder_from_meta(
                    str(z[f"{side}_meta"]), z[f"{side}_proj"],
                    z[f"{side}_tables"], z[f"{side}_offsets"],
                )
        try:
            model = NCFModel(variant=variant, P=z["P"], Q=z["Q"],
                             model_encoder=encoders.get("model"),
                             task_encoder=encoders.get("task"),
                             weights=weights, biases=biases)
        except ScorecastError as exc:
            raise CheckpointError(f"{path}: inconsistent checkpoint ({exc})") from exc
    if model.schema_hash() != stored_hash:
        raise CheckpointError(
            f"{path}: schema hash mismatch (checkpoint {stored_hash[:12]}..., "
            f"reconstructed {model.schema_hash()[:12]}...)"
        )
    return model
