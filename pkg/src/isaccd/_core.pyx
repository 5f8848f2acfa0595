# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementation of the hot numeric kernels.

Mirrors the surface and semantics of ``isaccd._pure``; see that module for
the objective's definition.  Starts are processed serially here (each one
is a tight C loop), whereas the fallback batches them through BLAS.
"""

import numpy as np

cimport numpy as cnp

from libc.math cimport INFINITY, log2, sqrt

cnp.import_array()

name = "ext"

cdef double LOG2E = 1.4426950408889634
cdef double GRAD_CLAMP = 1e-18


cdef void _project_row(double* v, double* buf, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, rho = 0
    cdef double key, cum = 0.0, css = 0.0, tau
    for i in range(n):
        buf[i] = v[i]
    # insertion sort, descending; n is small enough that this is cheap
    for i in range(1, n):
        key = buf[i]
        j = i - 1
        while j >= 0 and buf[j] < key:
            buf[j + 1] = buf[j]
            j -= 1
        buf[j + 1] = key
    for i in range(n):
        cum += buf[i]
        if buf[i] + (1.0 - cum) / (<double> (i + 1)) > 0.0:
            rho = i
            css = cum
    tau = (css - 1.0) / (<double> (rho + 1))
    for i in range(n):
        v[i] -= tau
        if v[i] < 0.0:
            v[i] = 0.0


def project_rows(v):
    """Euclidean projection of each row onto the probability simplex."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] arr = np.ascontiguousarray(
        np.atleast_2d(np.asarray(v, dtype=np.float64))
    ).copy()
    cdef Py_ssize_t k = arr.shape[0], n = arr.shape[1], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(n)
    for i in range(k):
        _project_row(&arr[i, 0], &buf[0], n)
    return arr


cdef void _forward(const double[:, ::1] l_stack, const double[::1] w,
                   double[::1] m) noexcept nogil:
    cdef Py_ssize_t r, j, rows = l_stack.shape[0], n = l_stack.shape[1]
    cdef double acc
    for r in range(rows):
        acc = 0.0
        for j in range(n):
            acc += l_stack[r, j] * w[j]
        m[r] = acc


cdef void _image_entropies(const double[::1] m, const long long[::1] row_off,
                           double[::1] h) noexcept nogil:
    cdef Py_ssize_t i, r, n_img = row_off.shape[0] - 1
    cdef double acc, x
    for i in range(n_img):
        acc = 0.0
        for r in range(row_off[i], row_off[i + 1]):
            x = m[r]
            if x > 0.0:
                acc -= x * log2(x)
        h[i] = acc


cdef void _eval_one(const double[:, ::1] l_stack, const long long[::1] row_off,
                    const double[:, ::1] gcoef, const double[:, ::1] glin,
                    const double[::1] dcoef, const double[::1] w,
                    double[::1] m, double[::1] h, double[::1] rates,
                    double* rate_out, double* dist_out) noexcept nogil:
    cdef Py_ssize_t i, g, j
    cdef Py_ssize_t n_img = row_off.shape[0] - 1
    cdef Py_ssize_t n_grp = gcoef.shape[0]
    cdef Py_ssize_t n = l_stack.shape[1]
    cdef double acc, best
    _forward(l_stack, w, m)
    _image_entropies(m, row_off, h)
    best = INFINITY
    for g in range(n_grp):
        acc = 0.0
        for i in range(n_img):
            acc += gcoef[g, i] * h[i]
        for j in range(n):
            acc += glin[g, j] * w[j]
        rates[g] = acc
        if acc < best:
            best = acc
    rate_out[0] = best
    acc = 0.0
    for i in range(n_img):
        acc += dcoef[i] * h[i]
    dist_out[0] = acc


def evaluate(l_stack, row_off, gcoef, glin, dcoef, w):
    """Exact (rate, dist) of the min-of-entropies objective for each row of w."""
    cdef const double[:, ::1] lmat = np.ascontiguousarray(l_stack, dtype=np.float64)
    cdef const long long[::1] offs = np.ascontiguousarray(row_off, dtype=np.int64)
    cdef const double[:, ::1] gc = np.ascontiguousarray(gcoef, dtype=np.float64)
    cdef const double[:, ::1] gl = np.ascontiguousarray(glin, dtype=np.float64)
    cdef const double[::1] dc = np.ascontiguousarray(dcoef, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] warr = np.ascontiguousarray(
        np.atleast_2d(np.asarray(w, dtype=np.float64))
    )
    cdef Py_ssize_t k = warr.shape[0], kk
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rate = np.empty(k)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.empty(k)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] m = np.empty(lmat.shape[0])
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = np.empty(offs.shape[0] - 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rates = np.empty(gc.shape[0])
    cdef double[:, ::1] wv = warr
    for kk in range(k):
        _eval_one(lmat, offs, gc, gl, dc, wv[kk], m, h, rates,
                  &rate[kk], &dist[kk])
    return rate, dist


def ascend(l_stack, row_off, gcoef, glin, dcoef, w0, double lam, int iters,
           double step_c, double tie_tol, double tol):
    """Projected supergradient ascent of rate - lam * dist, start by start.

    Same contract as the fallback: returns (w_best, rate_best, dist_best,
    converged) with iteration 0 included among the candidates.
    """
    cdef const double[:, ::1] lmat = np.ascontiguousarray(l_stack, dtype=np.float64)
    cdef const long long[::1] offs = np.ascontiguousarray(row_off, dtype=np.int64)
    cdef const double[:, ::1] gc = np.ascontiguousarray(gcoef, dtype=np.float64)
    cdef const double[:, ::1] gl = np.ascontiguousarray(glin, dtype=np.float64)
    cdef const double[::1] dc = np.ascontiguousarray(dcoef, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] warr = np.ascontiguousarray(
        np.atleast_2d(np.asarray(w0, dtype=np.float64))
    ).copy()

    cdef Py_ssize_t k = warr.shape[0], n = warr.shape[1]
    cdef Py_ssize_t n_img = offs.shape[0] - 1, n_grp = gc.shape[0]
    cdef Py_ssize_t rows = lmat.shape[0]
    cdef int half_at = iters // 2

    cdef cnp.ndarray[cnp.float64_t, ndim=2] best_w = warr.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_rate = np.zeros(k)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_dist = np.zeros(k)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] converged = np.zeros(k, dtype=np.uint8)

    cdef cnp.ndarray[cnp.float64_t, ndim=1] m = np.empty(rows)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = np.empty(n_img)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rates = np.empty(n_grp)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wbk = np.empty(n)

    cdef double[:, ::1] wv = warr
    cdef double[:, ::1] bwv = best_w
    cdef double[::1] mv = m, hv = h, rv = rates, gv = grad, bv = buf
    cdef double[::1] wcur = ww, wbest = wbk

    cdef Py_ssize_t kk, i, g, j, r, t, n_act
    cdef double rate, dist, val, best_val, half_val, coef, f, step, acc

    for kk in range(k):
        for j in range(n):
            wcur[j] = wv[kk, j]
            wbest[j] = wv[kk, j]
        best_val = -INFINITY
        half_val = -INFINITY
        best_rate[kk] = 0.0
        best_dist[kk] = 0.0
        for t in range(iters + 1):
            _forward(lmat, wcur, mv)
            _image_entropies(mv, offs, hv)
            rate = INFINITY
            for g in range(n_grp):
                acc = 0.0
                for i in range(n_img):
                    acc += gc[g, i] * hv[i]
                for j in range(n):
                    acc += gl[g, j] * wcur[j]
                rv[g] = acc
                if acc < rate:
                    rate = acc
            dist = 0.0
            for i in range(n_img):
                dist += dc[i] * hv[i]
            val = rate - lam * dist
            if val > best_val:
                best_val = val
                best_rate[kk] = rate
                best_dist[kk] = dist
                for j in range(n):
                    wbest[j] = wcur[j]
            if t == half_at:
                half_val = best_val
            if t == iters:
                break

            n_act = 0
            for g in range(n_grp):
                if rv[g] <= rate + tie_tol:
                    n_act += 1
            for j in range(n):
                gv[j] = 0.0
            for g in range(n_grp):
                if rv[g] <= rate + tie_tol:
                    for j in range(n):
                        gv[j] += gl[g, j] / n_act
            for i in range(n_img):
                coef = -lam * dc[i]
                for g in range(n_grp):
                    if rv[g] <= rate + tie_tol:
                        coef += gc[g, i] / n_act
                if coef == 0.0:
                    continue
                for r in range(offs[i], offs[i + 1]):
                    f = mv[r]
                    if f < GRAD_CLAMP:
                        f = GRAD_CLAMP
                    f = -coef * (log2(f) + LOG2E)
                    for j in range(n):
                        gv[j] += f * lmat[r, j]
            step = step_c / sqrt(<double> (t + 1))
            for j in range(n):
                wcur[j] += step * gv[j]
            _project_row(&wcur[0], &bv[0], n)

        if best_val - half_val <= tol:
            converged[kk] = 1
        for j in range(n):
            bwv[kk, j] = wbest[j]

    return best_w, best_rate, best_dist, converged.astype(bool)
