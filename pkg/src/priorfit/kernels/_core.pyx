# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: fused single-pass versions of the reference ops.

Semantics match ``reference.py`` exactly; see that module for contracts.
Operation order inside each kernel mirrors the reference so results agree
bit-for-bit wherever libm and numpy round identically.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt

cnp.import_array()


def relu(cnp.ndarray pre):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(pre, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i, n = flat.shape[0]
    for i in range(n):
        out[i] = flat[i] if flat[i] > 0.0 else 0.0
    return out.reshape(np.shape(pre))


def relu_grad(cnp.ndarray pre, cnp.ndarray grad_out):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(pre, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.ascontiguousarray(grad_out, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(p)
    cdef Py_ssize_t i, n = p.shape[0]
    if g.shape[0] != n:
        raise ValueError("pre and grad_out must have the same size")
    for i in range(n):
        out[i] = g[i] if p[i] > 0.0 else 0.0
    return out.reshape(np.shape(pre))


def softmax_rows(cnp.ndarray logits):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] z = np.ascontiguousarray(logits, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty_like(z)
    cdef Py_ssize_t i, j, rows = z.shape[0], cols = z.shape[1]
    cdef double row_max, total
    for i in range(rows):
        row_max = z[i, 0]
        for j in range(1, cols):
            if z[i, j] > row_max:
                row_max = z[i, j]
        total = 0.0
        for j in range(cols):
            out[i, j] = exp(z[i, j] - row_max)
            total += out[i, j]
        for j in range(cols):
            out[i, j] /= total
    return out


def softmax_grad_rows(cnp.ndarray probs, cnp.ndarray grad_probs):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g = np.ascontiguousarray(grad_probs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty_like(p)
    cdef Py_ssize_t i, j, rows = p.shape[0], cols = p.shape[1]
    cdef double inner
    if g.shape[0] != rows or g.shape[1] != cols:
        raise ValueError("probs and grad_probs must have the same shape")
    for i in range(rows):
        inner = 0.0
        for j in range(cols):
            inner += g[i, j] * p[i, j]
        for j in range(cols):
            out[i, j] = p[i, j] * (g[i, j] - inner)
    return out


def sorted_pairwise_l1(cnp.ndarray a_sorted, cnp.ndarray b_sorted):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(a_sorted, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.ascontiguousarray(b_sorted, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] signs = np.empty_like(a)
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double total = 0.0, diff
    if b.shape[0] != n:
        raise ValueError("inputs must have the same length")
    for i in range(n):
        diff = a[i] - b[i]
        total += fabs(diff)
        signs[i] = 1.0 if diff > 0.0 else (-1.0 if diff < 0.0 else 0.0)
    return total, signs


def adam_update(cnp.ndarray param, cnp.ndarray grad, cnp.ndarray m, cnp.ndarray v,
                long t, double lr, double beta1, double beta2, double eps,
                double weight_decay):
    # in-place update: ravel() must be a view, not a copy
    if not (param.flags.c_contiguous and m.flags.c_contiguous and v.flags.c_contiguous):
        raise ValueError("param, m, and v must be C-contiguous")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = param.ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.ascontiguousarray(grad, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mm = m.ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = v.ravel()
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double c1 = 1.0 - beta1**t
    cdef double c2 = 1.0 - beta2**t
    cdef double one_minus_b1 = 1.0 - beta1
    cdef double one_minus_b2 = 1.0 - beta2
    cdef double m_hat, v_hat
    if g.shape[0] != n or mm.shape[0] != n or vv.shape[0] != n:
        raise ValueError("parameter, gradient, and moment shapes must match")
    for i in range(n):
        mm[i] = beta1 * mm[i] + one_minus_b1 * g[i]
        vv[i] = beta2 * vv[i] + one_minus_b2 * g[i] * g[i]
        m_hat = mm[i] / c1
        v_hat = vv[i] / c2
        p[i] -= lr * m_hat / (sqrt(v_hat) + eps)
        if weight_decay != 0.0:
            p[i] -= lr * weight_decay * p[i]


def l2_normalize_rows(cnp.ndarray x):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty_like(xx)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] norms = np.empty(xx.shape[0])
    cdef Py_ssize_t i, j, rows = xx.shape[0], cols = xx.shape[1]
    cdef double acc
    for i in range(rows):
        acc = 0.0
        for j in range(cols):
            acc += xx[i, j] * xx[i, j]
        norms[i] = sqrt(acc)
        for j in range(cols):
            out[i, j] = xx[i, j] / norms[i]
    return out, norms
