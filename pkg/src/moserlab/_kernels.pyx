# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""
import numpy as np
from libc.math cimport fabs, pow, sqrt


def power_sum(values, weights, double r):
    cdef double[::1] a = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double m = 0.0, s = 0.0, x
    if n == 0:
        return 0.0, 0.0
    for i in range(n):
        x = fabs(a[i])
        if x > m:
            m = x
    if m == 0.0:
        return 0.0, 0.0
    for i in range(n):
        x = fabs(a[i]) / m
        if x > 0.0:
            s += w[i] * pow(x, r)
    return m, s


def flux_local(G, measure, u_loc, double p, double eps):
    cdef double[:, :, ::1] g = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[::1] meas = np.ascontiguousarray(measure, dtype=np.float64)
    cdef double[:, ::1] u = np.ascontiguousarray(u_loc, dtype=np.float64)
    cdef Py_ssize_t ne = g.shape[0], k = g.shape[1], d = g.shape[2]
    res_arr = np.zeros((ne, k))
    jac_arr = np.zeros((ne, k, k))
    cdef double[:, ::1] res = res_arr
    cdef double[:, :, ::1] jac = jac_arr
    cdef double grad[3]
    cdef double gg[8]
    cdef Py_ssize_t e, a, b, j
    cdef double g2, w, w2, acc, dot
    for e in range(ne):
        for j in range(d):
            acc = 0.0
            for a in range(k):
                acc += u[e, a] * g[e, a, j]
            grad[j] = acc
        g2 = eps * eps
        for j in range(d):
            g2 += grad[j] * grad[j]
        if p == 2.0:
            w = 1.0
            w2 = 0.0
        elif g2 == 0.0:
            w = pow(g2, (p - 2.0) / 2.0)
            w2 = 0.0 if p > 2.0 else (p - 2.0) * pow(g2, (p - 4.0) / 2.0)
        else:
            w = pow(g2, (p - 2.0) / 2.0)
            w2 = (p - 2.0) * pow(g2, (p - 4.0) / 2.0)
        for a in range(k):
            acc = 0.0
            for j in range(d):
                acc += grad[j] * g[e, a, j]
            gg[a] = acc
            res[e, a] = meas[e] * w * acc
        for a in range(k):
            for b in range(k):
                dot = 0.0
                for j in range(d):
                    dot += g[e, a, j] * g[e, b, j]
                jac[e, a, b] = meas[e] * (w * dot + w2 * gg[a] * gg[b])
    return res_arr, jac_arr


def mass_local(wc, phi):
    cdef double[:, ::1] W = np.ascontiguousarray(wc, dtype=np.float64)
    cdef double[:, ::1] P = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t ne = W.shape[0], nq = W.shape[1], k = P.shape[1]
    out_arr = np.zeros((ne, k, k))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t e, q, a, b
    cdef double c
    for e in range(ne):
        for q in range(nq):
            c = W[e, q]
            if c == 0.0:
                continue
            for a in range(k):
                for b in range(a, k):
                    out[e, a, b] += c * P[q, a] * P[q, b]
        for a in range(k):
            for b in range(a + 1, k):
                out[e, b, a] = out[e, a, b]
    return out_arr
