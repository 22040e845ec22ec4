# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM kernels: same contract as ``_lstm_np`` (see its docstring).

The per-step gate projections go through BLAS dgemm; the recurrence,
activations, and length masking run in plain C loops. Single-threaded and
deterministic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh as ctanh
from libc.string cimport memset
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline double sig(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef void _gemm_zt(double* a, double* bmat, double* c,
                   int m, int n, int k, double beta) noexcept nogil:
    # Row-major C(n, m) += B(n, k) . A(m, k)^T via column-major BLAS:
    # cm C(m, n) = op(A)('T': (m, k)) . op(B)('N': (k, n))
    cdef double one = 1.0
    dgemm("T", "N", &m, &n, &k, &one, a, &k, bmat, &k, &beta, c, &m)


cdef void _gemm_accum_outer(double* xt, double* dz, double* out,
                            int d, int fourh, int bb) noexcept nogil:
    # Row-major OUT(4H, d) += DZ(B, 4H)^T . XT(B, d)
    cdef double one = 1.0
    dgemm("N", "T", &d, &fourh, &bb, &one, xt, &d, dz, &fourh, &one, out, &d)


cdef void _gemm_dh(double* u, double* dz, double* out,
                   int h, int fourh, int bb) noexcept nogil:
    # Row-major OUT(B, H) = DZ(B, 4H) . U(4H, H)
    cdef double one = 1.0
    cdef double zero = 0.0
    dgemm("N", "N", &h, &bb, &fourh, &one, u, &h, dz, &fourh, &zero, out, &h)


def forward_batch(X, lengths, in_mask, rec_mask, W, U, b, w_out, b_out):
    cdef cnp.ndarray[double, ndim=3, mode="c"] X_ = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[long, ndim=1, mode="c"] len_ = np.ascontiguousarray(lengths, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] im_ = np.ascontiguousarray(in_mask, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] rm_ = np.ascontiguousarray(rec_mask, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] W_ = np.ascontiguousarray(W, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] U_ = np.ascontiguousarray(U, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] b_ = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] wo_ = np.ascontiguousarray(w_out, dtype=np.float64)
    cdef double bo = b_out

    cdef Py_ssize_t B = X_.shape[0]
    cdef Py_ssize_t T = X_.shape[1]
    cdef Py_ssize_t d = X_.shape[2]
    cdef Py_ssize_t H = wo_.shape[0]

    cdef cnp.ndarray[double, ndim=3, mode="c"] I = np.zeros((T, B, H))
    cdef cnp.ndarray[double, ndim=3, mode="c"] F = np.zeros((T, B, H))
    cdef cnp.ndarray[double, ndim=3, mode="c"] G = np.zeros((T, B, H))
    cdef cnp.ndarray[double, ndim=3, mode="c"] O = np.zeros((T, B, H))
    cdef cnp.ndarray[double, ndim=3, mode="c"] C = np.zeros((T, B, H))
    cdef cnp.ndarray[double, ndim=3, mode="c"] Hs = np.zeros((T, B, H))
    cdef cnp.ndarray[double, ndim=1, mode="c"] logits = np.zeros(B)
    cdef cnp.ndarray[double, ndim=1, mode="c"] probs = np.zeros(B)

    cdef cnp.ndarray[double, ndim=2, mode="c"] h = np.zeros((B, H))
    cdef cnp.ndarray[double, ndim=2, mode="c"] c = np.zeros((B, H))
    cdef cnp.ndarray[double, ndim=2, mode="c"] Z = np.zeros((B, 4 * H))
    cdef cnp.ndarray[double, ndim=2, mode="c"] xt = np.zeros((B, d))
    cdef cnp.ndarray[double, ndim=2, mode="c"] ht = np.zeros((B, H))

    cdef Py_ssize_t t, bb, j, t_start
    cdef double iv, fv, gv, ov, cn, acc
    cdef int mi, mn, mk

    if B == 0:
        return probs, logits, (X_, len_, im_, rm_, I, F, G, O, C, Hs)

    t_start = T
    for bb in range(B):
        if T - len_[bb] < t_start:
            t_start = T - len_[bb]
    if t_start < 0:
        t_start = 0

    with nogil:
        for t in range(t_start, T):
            for bb in range(B):
                for j in range(d):
                    xt[bb, j] = X_[bb, t, j] * im_[bb, j]
                for j in range(H):
                    ht[bb, j] = h[bb, j] * rm_[bb, j]
                for j in range(4 * H):
                    Z[bb, j] = b_[j]
            _gemm_zt(&W_[0, 0], &xt[0, 0], &Z[0, 0], <int>(4 * H), <int>B, <int>d, 1.0)
            _gemm_zt(&U_[0, 0], &ht[0, 0], &Z[0, 0], <int>(4 * H), <int>B, <int>H, 1.0)
            for bb in range(B):
                if t >= T - len_[bb]:
                    for j in range(H):
                        iv = sig(Z[bb, j])
                        fv = sig(Z[bb, H + j])
                        gv = ctanh(Z[bb, 2 * H + j])
                        ov = sig(Z[bb, 3 * H + j])
                        cn = fv * c[bb, j] + iv * gv
                        I[t, bb, j] = iv
                        F[t, bb, j] = fv
                        G[t, bb, j] = gv
                        O[t, bb, j] = ov
                        c[bb, j] = cn
                        h[bb, j] = ov * ctanh(cn)
                        C[t, bb, j] = cn
                        Hs[t, bb, j] = h[bb, j]
                else:
                    for j in range(H):
                        C[t, bb, j] = c[bb, j]
                        Hs[t, bb, j] = h[bb, j]
        for bb in range(B):
            acc = bo
            for j in range(H):
                acc += h[bb, j] * wo_[j]
            logits[bb] = acc
            probs[bb] = sig(acc)

    return probs, logits, (X_, len_, im_, rm_, I, F, G, O, C, Hs)


def backward_batch(cache, W, U, w_out, dlogits):
    cdef cnp.ndarray[double, ndim=3, mode="c"] X_
    cdef cnp.ndarray[long, ndim=1, mode="c"] len_
    cdef cnp.ndarray[double, ndim=2, mode="c"] im_
    cdef cnp.ndarray[double, ndim=2, mode="c"] rm_
    cdef cnp.ndarray[double, ndim=3, mode="c"] I, F, G, O, C, Hs
    X_, len_, im_, rm_, I, F, G, O, C, Hs = cache

    cdef cnp.ndarray[double, ndim=2, mode="c"] W_ = np.ascontiguousarray(W, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] U_ = np.ascontiguousarray(U, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] wo_ = np.ascontiguousarray(w_out, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] dl_ = np.ascontiguousarray(dlogits, dtype=np.float64)

    cdef Py_ssize_t B = X_.shape[0]
    cdef Py_ssize_t T = X_.shape[1]
    cdef Py_ssize_t d = X_.shape[2]
    cdef Py_ssize_t H = wo_.shape[0]

    cdef cnp.ndarray[double, ndim=2, mode="c"] dW = np.zeros((4 * H, d))
    cdef cnp.ndarray[double, ndim=2, mode="c"] dU = np.zeros((4 * H, H))
    cdef cnp.ndarray[double, ndim=1, mode="c"] db = np.zeros(4 * H)
    cdef cnp.ndarray[double, ndim=1, mode="c"] dwo = np.zeros(H)
    cdef double dbo = 0.0

    cdef cnp.ndarray[double, ndim=2, mode="c"] dh = np.zeros((B, H))
    cdef cnp.ndarray[double, ndim=2, mode="c"] dc = np.zeros((B, H))
    cdef cnp.ndarray[double, ndim=2, mode="c"] dZ = np.zeros((B, 4 * H))
    cdef cnp.ndarray[double, ndim=2, mode="c"] dct = np.zeros((B, H))
    cdef cnp.ndarray[double, ndim=2, mode="c"] dHg = np.zeros((B, H))
    cdef cnp.ndarray[double, ndim=2, mode="c"] xt = np.zeros((B, d))
    cdef cnp.ndarray[double, ndim=2, mode="c"] ht = np.zeros((B, H))

    cdef Py_ssize_t t, bb, j, t_start
    cdef double iv, fv, gv, ov, tc, dov, div, dgv, dfv, cprev, hf

    if B == 0:
        return dW, dU, db, dwo, dbo

    with nogil:
        for bb in range(B):
            dbo += dl_[bb]
            if T > 0:
                for j in range(H):
                    hf = Hs[T - 1, bb, j]
                    dwo[j] += dl_[bb] * hf
                    dh[bb, j] = dl_[bb] * wo_[j]
            else:
                for j in range(H):
                    dh[bb, j] = dl_[bb] * wo_[j]

        t_start = T
        for bb in range(B):
            if T - len_[bb] < t_start:
                t_start = T - len_[bb]
        if t_start < 0:
            t_start = 0

        for t in range(T - 1, t_start - 1, -1):
            for bb in range(B):
                if t >= T - len_[bb]:
                    for j in range(H):
                        iv = I[t, bb, j]
                        fv = F[t, bb, j]
                        gv = G[t, bb, j]
                        ov = O[t, bb, j]
                        tc = ctanh(C[t, bb, j])
                        cprev = C[t - 1, bb, j] if t > 0 else 0.0
                        dov = dh[bb, j] * tc
                        dct[bb, j] = dc[bb, j] + dh[bb, j] * ov * (1.0 - tc * tc)
                        div = dct[bb, j] * gv
                        dgv = dct[bb, j] * iv
                        dfv = dct[bb, j] * cprev
                        dZ[bb, j] = div * iv * (1.0 - iv)
                        dZ[bb, H + j] = dfv * fv * (1.0 - fv)
                        dZ[bb, 2 * H + j] = dgv * (1.0 - gv * gv)
                        dZ[bb, 3 * H + j] = dov * ov * (1.0 - ov)
                else:
                    memset(&dZ[bb, 0], 0, 4 * H * sizeof(double))

                for j in range(d):
                    xt[bb, j] = X_[bb, t, j] * im_[bb, j]
                if t > 0:
                    for j in range(H):
                        ht[bb, j] = Hs[t - 1, bb, j] * rm_[bb, j]
                else:
                    for j in range(H):
                        ht[bb, j] = 0.0

            _gemm_accum_outer(&xt[0, 0], &dZ[0, 0], &dW[0, 0], <int>d, <int>(4 * H), <int>B)
            _gemm_accum_outer(&ht[0, 0], &dZ[0, 0], &dU[0, 0], <int>H, <int>(4 * H), <int>B)
            _gemm_dh(&U_[0, 0], &dZ[0, 0], &dHg[0, 0], <int>H, <int>(4 * H), <int>B)

            for bb in range(B):
                if t >= T - len_[bb]:
                    for j in range(4 * H):
                        db[j] += dZ[bb, j]
                    for j in range(H):
                        dh[bb, j] = dHg[bb, j] * rm_[bb, j]
                        dc[bb, j] = dct[bb, j] * F[t, bb, j]

    return dW, dU, db, dwo, dbo
