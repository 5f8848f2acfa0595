"""NumPy implementation of the hot numeric kernels.

This is the fallback selected at import time when the compiled extension
(`isaccd._core`) is unavailable; both expose the same surface and the same
semantics.  The central object is a "min-of-entropies" objective

    rate(w)  = min_g [ sum_i gcoef[g, i] * H(L_i w) + glin[g] . w ]
    dist(w)  =        sum_i dcoef[i]    * H(L_i w)

over a probability vector w, where the L_i are fixed nonnegative linear
maps (stacked in ``l_stack`` with row offsets ``row_off``) and H is the
Shannon entropy in bits.  ``ascend`` runs projected (super)gradient ascent
on rate - lam * dist for a whole batch of starting points in lockstep.
"""

from __future__ import annotations

import math

import numpy as np

_LOG2E = math.log2(math.e)
#: floor applied inside logarithms when forming gradients
_GRAD_CLAMP = 1e-18

name = "pure"


def project_rows(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    k, n = v.shape
    u = np.sort(v, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1)
    j = np.arange(1, n + 1)
    cond = u + (1.0 - css) / j > 0.0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = (css[np.arange(k), rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - tau[:, None], 0.0)


def _images(l_stack, row_off, w):
    out = []
    for i in range(len(row_off) - 1):
        out.append(w @ l_stack[row_off[i] : row_off[i + 1]].T)
    return out


def _entropies(ms):
    cols = []
    for m in ms:
        mm = np.maximum(m, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(mm > 0.0, mm * np.log2(np.where(mm > 0.0, mm, 1.0)), 0.0)
        cols.append(-t.sum(axis=1))
    return np.stack(cols, axis=1)  # (K, n_img)


def evaluate(l_stack, row_off, gcoef, glin, dcoef, w):
    """Exact (rate, dist) of the min-of-entropies objective for each row of w."""
    w = np.atleast_2d(np.asarray(w, dtype=float))
    h = _entropies(_images(l_stack, row_off, w))
    rates = h @ gcoef.T + w @ glin.T
    return rates.min(axis=1), h @ dcoef


def ascend(l_stack, row_off, gcoef, glin, dcoef, w0, lam, iters, step_c, tie_tol, tol):
    """Projected supergradient ascent of rate - lam * dist, batched over starts.

    Returns (w_best, rate_best, dist_best, converged): the per-start iterate
    with the best Lagrangian seen (iteration 0 included), its exact rate and
    distortion, and whether the best value stopped improving by more than
    ``tol`` over the second half of the run.
    """
    w = np.atleast_2d(np.asarray(w0, dtype=float)).copy()
    k, n = w.shape
    n_img = len(row_off) - 1
    best_val = np.full(k, -np.inf)
    best_w = w.copy()
    best_rate = np.zeros(k)
    best_dist = np.zeros(k)
    half_val = np.full(k, -np.inf)
    half_at = iters // 2

    for t in range(iters + 1):
        ms = _images(l_stack, row_off, w)
        h = _entropies(ms)
        rates = h @ gcoef.T + w @ glin.T  # (K, G)
        rate = rates.min(axis=1)
        dist = h @ dcoef
        val = rate - lam * dist
        improved = val > best_val
        if np.any(improved):
            best_val = np.where(improved, val, best_val)
            best_rate = np.where(improved, rate, best_rate)
            best_dist = np.where(improved, dist, best_dist)
            best_w[improved] = w[improved]
        if t == half_at:
            half_val = best_val.copy()
        if t == iters:
            break

        # supergradient: average over tied active min-terms
        active = rates <= rate[:, None] + tie_tol
        weights = active / active.sum(axis=1, keepdims=True)
        ceff = weights @ gcoef  # (K, n_img)
        grad = weights @ glin  # (K, n)
        for i in range(n_img):
            coef = ceff[:, i] - lam * dcoef[i]
            if np.all(coef == 0.0):
                continue
            li = l_stack[row_off[i] : row_off[i + 1]]
            gvec = -(np.log2(np.maximum(ms[i], _GRAD_CLAMP)) + _LOG2E) @ li
            grad += coef[:, None] * gvec
        w = project_rows(w + (step_c / math.sqrt(t + 1.0)) * grad)

    converged = (best_val - half_val) <= tol
    return best_w, best_rate, best_dist, converged
