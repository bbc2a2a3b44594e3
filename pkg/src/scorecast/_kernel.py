"""Compiled SGD inner loop for the neural predictor.

Mirrors the numpy reference step (ncf.apply_sgd_step): same input assembly,
same backprop, same update semantics (all gradients taken at the pre-update
parameters), same sampling stream. Used when numba is importable; otherwise
training falls back to the slower, semantically identical numpy loop.
Equivalence of the two paths is covered by tests.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    from numba.typed import List as NumbaList

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*a, **k):  # type: ignore
        def deco(f):
            return f

        return deco if not (len(a) == 1 and callable(a[0])) else a[0]


@njit(cache=True)
def _sgd_chunk(P, Q, proj_m, tab_m, proj_t, tab_t, Ws, bs,
               Zm, Rm, Mm, Zt, Rt, Mt,
               us, its, rs, picks,
               lr, lam, use_ids, use_factors,
               p_off, q_off,
               num_cols_m, cat_cols_m, num_cols_t, cat_cols_t,
               in_width):
    steps, B = picks.shape
    d = P.shape[1]
    n_layers = len(Ws)
    fw_m = proj_m.shape[1]
    fw_t = proj_t.shape[1]
    Gm = Zm.shape[1]
    Cm = Rm.shape[1]
    Gt = Zt.shape[1]
    Ct = Rt.shape[1]
    # workspaces hoisted out of the step loop
    hs = NumbaList()
    hs.append(np.zeros((B, in_width)))
    for k in range(n_layers - 1):
        hs.append(np.zeros((B, Ws[k].shape[1])))
    X = hs[0]
    s = np.empty(B)
    dlast = np.empty((B, 1))
    u = np.empty(B, dtype=np.int64)
    it = np.empty(B, dtype=np.int64)
    gproj_m = np.zeros((Gm, fw_m))
    gproj_t = np.zeros((Gt, fw_t))
    dp = np.empty((B, d))
    dq = np.empty((B, d))
    for step in range(steps):
        for b in range(B):
            u[b] = us[picks[step, b]]
            it[b] = its[picks[step, b]]
        # ---- assemble input rows ----
        for b in range(B):
            if use_ids:
                for j in range(d):
                    X[b, p_off + j] = P[u[b], j]
                    X[b, q_off + j] = Q[it[b], j]
            if use_factors:
                for g in range(Gm):
                    z = Zm[u[b], g]
                    for w in range(fw_m):
                        X[b, num_cols_m[g * fw_m + w]] = z * proj_m[g, w]
                for c in range(Cm):
                    row = Rm[u[b], c]
                    mk = Mm[u[b], c]
                    for w in range(fw_m):
                        X[b, cat_cols_m[c * fw_m + w]] = tab_m[row, w] * mk
                for g in range(Gt):
                    z = Zt[it[b], g]
                    for w in range(fw_t):
                        X[b, num_cols_t[g * fw_t + w]] = z * proj_t[g, w]
                for c in range(Ct):
                    row = Rt[it[b], c]
                    mk = Mt[it[b], c]
                    for w in range(fw_t):
                        X[b, cat_cols_t[c * fw_t + w]] = tab_t[row, w] * mk
        # ---- forward ----
        for k in range(n_layers - 1):
            z2 = np.dot(hs[k], Ws[k])
            out = hs[k + 1]
            bk = bs[k]
            for b in range(B):
                for j in range(z2.shape[1]):
                    v = z2[b, j] + bk[j]
                    out[b, j] = v if v > 0.0 else 0.0
        zout = np.dot(hs[n_layers - 1], Ws[n_layers - 1])
        blast = bs[n_layers - 1]
        for b in range(B):
            s[b] = 1.0 / (1.0 + np.exp(-(zout[b, 0] + blast[0])))
            dlast[b, 0] = (2.0 * (s[b] - rs[picks[step, b]]) / B) * s[b] * (1.0 - s[b])
        # ---- backward; each layer updated after delta has passed it ----
        delta = dlast
        dX = dlast  # placeholder; reassigned when k == 0
        for k in range(n_layers - 1, -1, -1):
            hk = np.ascontiguousarray(hs[k].T)
            gW = np.dot(hk, delta)
            W = Ws[k]
            bvec = bs[k]
            nd = np.dot(delta, np.ascontiguousarray(W.T))
            if k > 0:
                hprev = hs[k]
                for b in range(B):
                    for j in range(nd.shape[1]):
                        if hprev[b, j] <= 0.0:
                            nd[b, j] = 0.0
            for j in range(bvec.shape[0]):
                acc = 0.0
                for b in range(B):
                    acc += delta[b, j]
                bvec[j] -= lr * acc
            if lam > 0.0:
                for a in range(W.shape[0]):
                    for j in range(W.shape[1]):
                        W[a, j] -= lr * (gW[a, j] + 2.0 * lam * W[a, j])
            else:
                for a in range(W.shape[0]):
                    for j in range(W.shape[1]):
                        W[a, j] -= lr * gW[a, j]
            if k > 0:
                delta = nd
            else:
                dX = nd
        # ---- route dX into embeddings ----
        if use_ids:
            for b in range(B):
                for j in range(d):
                    dp[b, j] = dX[b, p_off + j] + 2.0 * lam * P[u[b], j]
                    dq[b, j] = dX[b, q_off + j] + 2.0 * lam * Q[it[b], j]
            for b in range(B):
                for j in range(d):
                    P[u[b], j] -= lr * dp[b, j]
                    Q[it[b], j] -= lr * dq[b, j]
        if use_factors:
            if Gm > 0:
                for g in range(Gm):
                    for w in range(fw_m):
                        gproj_m[g, w] = 0.0
                for b in range(B):
                    for g in range(Gm):
                        z = Zm[u[b], g]
                        for w in range(fw_m):
                            gproj_m[g, w] += z * dX[b, num_cols_m[g * fw_m + w]]
                for g in range(Gm):
                    for w in range(fw_m):
                        proj_m[g, w] -= lr * (gproj_m[g, w] + 2.0 * lam * proj_m[g, w])
            for b in range(B):
                for c in range(Cm):
                    row = Rm[u[b], c]
                    mk = Mm[u[b], c]
                    if mk != 0.0:
                        for w in range(fw_m):
                            tab_m[row, w] -= lr * mk * dX[b, cat_cols_m[c * fw_m + w]]
            if Gt > 0:
                for g in range(Gt):
                    for w in range(fw_t):
                        gproj_t[g, w] = 0.0
                for b in range(B):
                    for g in range(Gt):
                        z = Zt[it[b], g]
                        for w in range(fw_t):
                            gproj_t[g, w] += z * dX[b, num_cols_t[g * fw_t + w]]
                for g in range(Gt):
                    for w in range(fw_t):
                        proj_t[g, w] -= lr * (gproj_t[g, w] + 2.0 * lam * proj_t[g, w])
            for b in range(B):
                for c in range(Ct):
                    row = Rt[it[b], c]
                    mk = Mt[it[b], c]
                    if mk != 0.0:
                        for w in range(fw_t):
                            tab_t[row, w] -= lr * mk * dX[b, cat_cols_t[c * fw_t + w]]


def run_chunk(model, reg, us, its, rs, picks, lr, lam):
    """Drive the compiled kernel for one chunk of steps."""
    lay = model.layout
    Ws = NumbaList()
    bs = NumbaList()
    for W in model.weights:
        Ws.append(W)
    for b in model.biases:
        bs.append(b)
    empty_f = np.zeros((0, 0))
    empty_i = np.zeros((0, 0), dtype=np.int64)
    empty_cols = np.zeros(0, dtype=np.int64)
    if model.uses_factors:
        enc_m, enc_t = model.model_encoder, model.task_encoder
        proj_m, tab_m = enc_m.proj, enc_m.tables
        proj_t, tab_t = enc_t.proj, enc_t.tables
        if proj_t.shape[0] == 0:
            proj_t = np.zeros((0, enc_t.width))
        Zm, Rm, Mm = reg.Zm, reg.Rm, reg.Mm
        Zt, Rt, Mt = reg.Zt, reg.Rt, reg.Mt
        num_cols_m = lay.num_cols["model"]
        cat_cols_m = lay.cat_cols["model"]
        num_cols_t = lay.num_cols["task"]
        cat_cols_t = lay.cat_cols["task"]
    else:
        proj_m = proj_t = empty_f
        tab_m = tab_t = empty_f
        Zm = Zt = empty_f
        Rm = Rt = empty_i
        Mm = Mt = empty_f
        num_cols_m = cat_cols_m = num_cols_t = cat_cols_t = empty_cols
    if model.uses_ids:
        p_off, q_off = lay.id_slices[0].start, lay.id_slices[1].start
    else:
        p_off = q_off = 0
    _sgd_chunk(model.P, model.Q, proj_m, tab_m, proj_t, tab_t, Ws, bs,
               Zm, Rm, Mm, Zt, Rt, Mt,
               us, its, rs, picks,
               float(lr), float(lam), model.uses_ids, model.uses_factors,
               p_off, q_off,
               num_cols_m, cat_cols_m, num_cols_t, cat_cols_t,
               lay.input_width)
