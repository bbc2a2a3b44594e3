import numpy as np
import pytest

from scorecast.dataset import ModelRecord, ScoreMatrix, TaskRecord, load_bundled

MODEL_PRESENT = frozenset({
    "family", "pretrain_tokens_b", "params_m", "context_window", "batch_size_m",
    "layers", "num_heads", "kv_size", "bottleneck_activation_size",
})
TASK_PRESENT = frozenset({"ability", "task_family", "output_format", "few_shot"})


def make_model_record(name, family="fam0", params_m=7000.0, tokens_b=1000.0,
                      present=MODEL_PRESENT, **overrides):
    fields = dict(
        identifier=name, family=family, pretrain_tokens_b=tokens_b,
        params_m=params_m, gpu_hours=0.0, flops=0.0, context_window="2048",
        batch_size_m="1M", layers=32.0, num_heads=32.0, kv_size=128.0,
        bottleneck_activation_size=4096.0, carbon_tco2eq=0.0,
        present=frozenset(present),
    )
    fields.update(overrides)
    return ModelRecord(**fields)


def make_task_record(name, ability="reasoning", task_family="tf0",
                     output_format="multiple_choice", few_shot="0-shot"):
    return TaskRecord(identifier=name, ability=ability, task_family=task_family,
                      output_format=output_format, few_shot=few_shot,
                      present=TASK_PRESENT)


def synthetic_dataset(n=6, m=5, density=1.0, seed=0, rank=1, noise=0.0):
    """Low-rank synthetic scores with factor records tied to model scale."""
    rng = np.random.default_rng(seed)
    models = tuple(f"M{k}" for k in range(n))
    tasks = tuple(f"T{k}" for k in range(m))
    params = np.geomspace(100, 100000, n)
    v = (np.log10(params) - 2.0) / 3.0
    base = rng.uniform(0.1, 0.3, m)
    span = rng.uniform(0.4, 0.6, m)
    if rank == 1:
        S = base[None, :] + span[None, :] * v[:, None]
    else:
        P = rng.uniform(0, 1, (n, rank)) / np.sqrt(rank)
        Q = rng.uniform(0, 1, (m, rank)) / np.sqrt(rank)
        S = P @ Q.T
    S = np.clip(S + noise * rng.normal(size=(n, m)), 0.0, 1.0)
    entries = []
    for u in range(n):
        for i in range(m):
            if rng.random() < density:
                entries.append((u, i, float(round(S[u, i], 6)), ""))
    matrix = ScoreMatrix(models, tasks, tuple(entries))
    model_records = {
        name: make_model_record(name, family=f"fam{k % 2}", params_m=float(params[k]),
                                tokens_b=float(500 + 100 * k))
        for k, name in enumerate(models)
    }
    task_records = {
        name: make_task_record(name, ability=f"ab{k % 2}", task_family=f"tf{k}",
                               few_shot=f"{k % 3}-shot")
        for k, name in enumerate(tasks)
    }
    return matrix, model_records, task_records


@pytest.fixture(scope="session")
def bundled():
    return load_bundled()


@pytest.fixture(scope="session")
def tiny_factor_model():
    """A small trained factor-enhanced model shared by attribution tests."""
    from scorecast.mf import TrainConfig
    from scorecast.ncf import train_ncf

    matrix, model_records, task_records = synthetic_dataset(n=8, m=5, seed=3,
                                                            rank=1, noise=0.02)
    config = TrainConfig(latent_dim=4, hidden_sizes=(12, 8), factor_width=3,
                         iterations=4000, batch_size=16, learning_rate=0.05, seed=5)
    model = train_ncf(matrix, model_records, task_records, "factor_enhanced", config)
    return model, matrix, model_records, task_records
