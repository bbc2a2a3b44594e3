"""Matrix factorization trained by per-entry stochastic gradient descent.

The score matrix is approximated as P @ Q.T with latent dimension d. Each
training iteration samples one observed entry (u, i, r) uniformly and takes
a gradient step on the squared error (p_u . q_i - r)^2, optionally with an
L2 penalty. Predictions are clamped to [0, 1] at the reporting boundary;
gradients always use the raw inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import ScoreMatrix
from .errors import CheckpointError, ConfigError, TrainingError, ValidationError

LOSS_SAMPLE_EVERY = 10_000


@dataclass(frozen=True)
class TrainConfig:
    """Shared training hyperparameters.

    latent_dim / learning_rate / iterations defaults follow the score-matrix
    experiments this package reproduces; the remaining fields only matter for
    the neural predictor (hidden_sizes, batch_size, factor_width).
    """

    latent_dim: int = 10
    learning_rate: float = 0.01
    iterations: int = 250_000
    l2_penalty: float = 0.0
    seed: int = 0
    hidden_sizes: tuple[int, ...] = (64, 32)
    batch_size: int = 64
    factor_width: int = 8

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ConfigError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.l2_penalty < 0:
            raise ConfigError(f"l2_penalty must be >= 0, got {self.l2_penalty}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.factor_width < 1:
            raise ConfigError(f"factor_width must be >= 1, got {self.factor_width}")


@dataclass
class MFModel:
    """Latent factor tables: P is n_models x d, Q is n_tasks x d."""

    P: np.ndarray
    Q: np.ndarray
    loss_trace: list[tuple[int, float]] = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.P.shape[1]

    def predict_raw(self, model_index: int, task_index: int) -> float:
        """Unclamped inner product, for loss bookkeeping."""
        return float(self.P[model_index] @ self.Q[task_index])

    def predict(self, model_index: int, task_index: int) -> float:
        """Score prediction clamped to [0, 1]."""
        return float(np.clip(self.predict_raw(model_index, task_index), 0.0, 1.0))

    def predict_all(self) -> np.ndarray:
        return np.clip(self.P @ self.Q.T, 0.0, 1.0)

    def save(self, path) -> None:
        """Checkpoint as an npz archive holding d, n, m and row-major P, Q."""
        np.savez(path, kind="mf", d=self.d, n=self.P.shape[0], m=self.Q.shape[0],
                 P=np.ascontiguousarray(self.P), Q=np.ascontiguousarray(self.Q))

    @classmethod
    def load(cls, path) -> "MFModel":
        try:
            archive = np.load(path, allow_pickle=False)
        except (OSError, ValueError) as exc:
            raise CheckpointError(f"{path}: cannot read checkpoint ({exc})") from exc
        with archive as z:
            if "kind" not in z.files or str(z["kind"]) != "mf":
                raise CheckpointError(f"{path}: not a matrix-factorization checkpoint")
            P, Q, d = z["P"], z["Q"], int(z["d"])
        if P.shape[1] != d or Q.shape[1] != d:
            raise CheckpointError(f"{path}: inconsistent latent dimension")
        return cls(P=P, Q=Q)


def init_mf(n: int, m: int, config: TrainConfig) -> MFModel:
    """Gaussian(0, 0.1) initialization, deterministic from config.seed."""
    if n < 1 or m < 1:
        raise ConfigError(f"need n, m >= 1, got {n}x{m}")
    rng = np.random.Generator(np.random.PCG64(config.seed))
    P = rng.normal(0.0, 0.1, size=(n, config.latent_dim))
    Q = rng.normal(0.0, 0.1, size=(m, config.latent_dim))
    return MFModel(P=P, Q=Q)


def training_mse(model: MFModel, train: ScoreMatrix) -> float:
    u, i, r = train.arrays
    diff = np.einsum("ij,ij->i", model.P[u], model.Q[i]) - r
    return float(np.mean(diff * diff))


def train_mf(train: ScoreMatrix, config: TrainConfig) -> MFModel:
    """Run config.iterations single-entry SGD steps over the observed set.

    Deterministic for a fixed (train, config): initialization and the entry
    sampling stream both derive from config.seed. Raises TrainingError with
    the step index if the loss stops being finite.
    """
    if not train.entries:
        raise ValidationError("training matrix is empty")
    model = init_mf(train.n_models, train.n_tasks, config)
    P, Q = model.P, model.Q
    us, its, rs = train.arrays
    rng = np.random.Generator(np.random.PCG64(config.seed + 1))
    picks = rng.integers(0, len(rs), size=config.iterations)
    lr = config.learning_rate
    lam = config.l2_penalty
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is detected below
        for step in range(config.iterations):
            k = picks[step]
            u, i, r = us[k], its[k], rs[k]
            p = P[u]
            q = Q[i]
            err = p @ q - r
            grad_scale = 2.0 * lr
            new_p = p - grad_scale * (err * q + lam * p)
            Q[i] = q - grad_scale * (err * p + lam * q)
            P[u] = new_p
            if (step + 1) % LOSS_SAMPLE_EVERY == 0 or step + 1 == config.iterations:
                loss = training_mse(model, train)
                if not np.isfinite(loss):
                    raise TrainingError(
                        f"training loss became non-finite at step {step + 1}")
                model.loss_trace.append((step + 1, loss))
    return model


def predict_entries(model: MFModel, entries) -> dict[tuple[int, int], float]:
    return {(u, i): model.predict(u, i) for u, i, *_ in entries}
