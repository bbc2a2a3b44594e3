"""Central finite-difference check of every analytic gradient class.

The loss here is the mini-batch mean squared error; gradients come from
ncf.batch_loss_and_grads, the same routine the (reference) training step
uses, and the compiled kernel is separately pinned to that reference in
test_ncf.py.
"""

import numpy as np
import pytest

from conftest import synthetic_dataset
from scorecast.mf import TrainConfig
from scorecast import ncf

H = 1e-5
TOL = 1e-4


def build(variant, seed):
    matrix, mrec, trec = synthetic_dataset(n=5, m=4, seed=seed, rank=1, noise=0.05)
    config = TrainConfig(latent_dim=3, hidden_sizes=(7, 5), factor_width=4, seed=seed)
    model = ncf.init_ncf(5, 4, variant, config, mrec, trec)
    reg = ncf.build_registry_inputs(model, matrix, mrec, trec)
    us, its, rs = matrix.arrays
    return model, reg, us[:10], its[:10], rs[:10]


def parameter_classes(model):
    """Name -> (array, dense analytic gradient builder)."""
    out = {"P": model.P, "Q": model.Q}
    for k, (W, b) in enumerate(zip(model.weights, model.biases)):
        out[f"W{k}"] = W
        out[f"b{k}"] = b
    if model.model_encoder is not None:
        out["model_proj"] = model.model_encoder.proj
        out["model_tables"] = model.model_encoder.tables
        out["task_tables"] = model.task_encoder.tables
    return out


def dense_gradients(model, g):
    dense = {f"W{k}": g["W"][k] for k in range(len(model.weights))}
    dense.update({f"b{k}": g["b"][k] for k in range(len(model.biases))})
    dP, dQ = np.zeros_like(model.P), np.zeros_like(model.Q)
    if "P" in g:
        np.add.at(dP, g["P"][0], g["P"][1])
        np.add.at(dQ, g["Q"][0], g["Q"][1])
    dense["P"], dense["Q"] = dP, dQ
    if model.model_encoder is not None:
        dense["model_proj"] = g.get("proj_model", np.zeros_like(model.model_encoder.proj))
        dtab_m = np.zeros_like(model.model_encoder.tables)
        rows, dt = g["tables_model"]
        np.add.at(dtab_m, rows.ravel(), dt.reshape(-1, model.model_encoder.width))
        dense["model_tables"] = dtab_m
        dtab_t = np.zeros_like(model.task_encoder.tables)
        rows, dt = g["tables_task"]
        np.add.at(dtab_t, rows.ravel(), dt.reshape(-1, model.task_encoder.width))
        dense["task_tables"] = dtab_t
    return dense


def loss_of(model, reg, u, i, r):
    X, _ = model.batch_inputs(u, i, reg=reg)
    s = model.mlp_forward(X)
    return float(np.mean((s - r) ** 2))


@pytest.mark.parametrize("variant", ncf.VARIANTS)
@pytest.mark.parametrize("seed", [3, 19])
def test_all_parameter_classes(variant, seed):
    model, reg, u, i, r = build(variant, seed)
    g = ncf.batch_loss_and_grads(model, reg, u, i, r)
    dense = dense_gradients(model, g)
    worst = 0.0
    worst_at = ""
    for name, arr in parameter_classes(model).items():
        if name not in dense:
            continue
        analytic = np.asarray(dense[name]).ravel()
        flat = arr.ravel()
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + H
            lp = loss_of(model, reg, u, i, r)
            flat[idx] = orig - H
            lm = loss_of(model, reg, u, i, r)
            flat[idx] = orig
            fd = (lp - lm) / (2 * H)
            rel = abs(fd - analytic[idx]) / max(1.0, abs(fd), abs(analytic[idx]))
            if rel > worst:
                worst, worst_at = rel, f"{name}[{idx}]"
    assert worst < TOL, f"{variant}: max relative error {worst:.3e} at {worst_at}"


def test_gradcheck_covers_masked_inference_path():
    """Gradients of the loss with a factor masked match finite differences
    too (the mask is a constant multiplier on the inputs)."""
    model, reg, u, i, r = build("factor_enhanced", 5)
    masked = model.masked(["family", "params_m"])
    g = ncf.batch_loss_and_grads(masked, reg, u, i, r)
    dense = dense_gradients(masked, g)
    for name, arr in (("W0", masked.weights[0]), ("P", masked.P)):
        analytic = np.asarray(dense[name]).ravel()
        flat = arr.ravel()
        for idx in range(0, flat.size, 7):
            orig = flat[idx]
            flat[idx] = orig + H
            lp = loss_of(masked, reg, u, i, r)
            flat[idx] = orig - H
            lm = loss_of(masked, reg, u, i, r)
            flat[idx] = orig
            fd = (lp - lm) / (2 * H)
            rel = abs(fd - analytic[idx]) / max(1.0, abs(fd), abs(analytic[idx]))
            assert rel < TOL
