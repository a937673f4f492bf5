"""Pure numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or disabled with
``MOSERLAB_PURE_PYTHON=1``.  Signatures and results match ``_kernels``.
"""
import numpy as np


def power_sum(values, weights, r):
    """Return ``(m, S)`` with ``m = max|values|`` and
    ``S = sum(weights * (|values| / m) ** r)``; ``(0, 0)`` for a zero field."""
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if a.size == 0:
        return 0.0, 0.0
    m = float(a.max())
    if m == 0.0:
        return 0.0, 0.0
    return m, float(np.dot(w, (a / m) ** r))


def flux_local(G, measure, u_loc, p, eps):
    """Element residuals and Jacobians of the regularized power flux.

    ``G`` has shape ``(ne, k, d)`` (constant basis gradients), ``measure``
    ``(ne,)`` element sizes, ``u_loc`` ``(ne, k)`` local nodal values.
    Returns ``res (ne, k)`` and ``jac (ne, k, k)``.
    """
    G = np.asarray(G, dtype=float)
    grad = np.einsum("ek,ekd->ed", u_loc, G)
    g2 = np.einsum("ed,ed->e", grad, grad) + eps * eps
    if p == 2.0:
        w = np.ones_like(g2)
        w2 = np.zeros_like(g2)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            w = g2 ** ((p - 2.0) / 2.0)
            w2 = (p - 2.0) * g2 ** ((p - 4.0) / 2.0)
        zero = g2 == 0.0
        if p > 2.0:
            w2[zero] = 0.0
    flux = w[:, None] * grad
    res = measure[:, None] * np.einsum("ed,ekd->ek", flux, G)
    GG = np.einsum("ekd,eld->ekl", G, G)
    Gg = np.einsum("ekd,ed->ek", G, grad)
    jac = measure[:, None, None] * (
        w[:, None, None] * GG + w2[:, None, None] * Gg[:, :, None] * Gg[:, None, :]
    )
    return res, jac


def mass_local(wc, phi):
    """``M[e, a, b] = sum_q wc[e, q] * phi[q, a] * phi[q, b]``."""
    return np.einsum("eq,qa,qb->eab", wc, phi, phi)
