"""Independent reference implementations used only by the tests.

Nothing here imports the package's algorithms; the condition table is
re-typed from its printed form and the linear solver assembles one
monolithic system directly.
"""
import math

import numpy as np


def sobolev_exp(r, N, override=None):
    if r < N:
        return N * r / (N - r)
    return override


def trace_exp(r, N, override=None):
    if r < N:
        return (N - 1) * r / (N - r)
    return override


def brute_force_conditions(d, table="strict"):
    """Evaluate the growth conditions from a plain dict of exponents.

    Returns ``{id: bool}``.  ``table`` is ``strict``, ``weak`` or
    ``dirichlet``; the Dirichlet table keeps only E1..E14.
    """
    p, q, N = d["p"], d["q"], d["N"]
    ov = d.get("working_exponent_override")
    P, Q = sobolev_exp(p, N, ov), sobolev_exp(q, N, ov)
    Pl, Ql = trace_exp(p, N, ov), trace_exp(q, N, ov)
    b = [None] + [d[f"b{i}"] for i in range(1, 9)]
    tb = [None] + [d[f"tb{i}"] for i in range(1, 9)]
    c = [None] + [d[f"c{i}"] for i in range(1, 5)]
    tc = [None] + [d[f"tc{i}"] for i in range(1, 5)]

    def lt(a, z):
        return a < z

    def le(a, z):
        return a <= z

    if table == "weak":
        # every reworked row: gap (crit - 1), non-strict
        out = {
            "E1": d["r1"] <= P, "E2": d["r2"] <= Q, "E3": b[1] <= P - 1,
            "E4'": b[2] <= Q * (P - 1) / P,
            "E5'": b[3] / P + b[4] / Q <= (P - 1) / P,
            "E6": b[5] <= p - 1,
            "E7'": b[6] <= q * (P - 1) / P,
            "E8'": b[7] / p + b[8] / q <= (P - 1) / P,
            "E9'": tb[1] <= P * (Q - 1) / Q,
            "E10": tb[2] <= Q - 1,
            "E11'": tb[3] / P + tb[4] / Q <= (Q - 1) / Q,
            "E12'": tb[5] <= p * (Q - 1) / Q,
            "E13": tb[6] <= q - 1,
            "E14'": tb[7] / p + tb[8] / q <= (Q - 1) / Q,
            "E15": c[1] <= Pl - 1,
            "E16'": c[2] <= Ql * (Pl - 1) / Pl,
            "E17'": c[3] / Pl + c[4] / Ql <= (Pl - 1) / Pl,
            "E18'": tc[1] <= Pl * (Ql - 1) / Ql,
            "E19": tc[2] <= Ql - 1,
            "E20'": tc[3] / Pl + tc[4] / Ql <= (Ql - 1) / Ql,
        }
        return out
    out = {
        "E1": le(d["r1"], P), "E2": le(d["r2"], Q), "E3": le(b[1], P - 1),
        "E4": lt(b[2], Q * (P - p) / P),
        "E5": lt(b[3] / P + b[4] / Q, (P - p) / P),
        "E6": le(b[5], p - 1),
        "E7": lt(b[6], q * (P - p) / P),
        "E8": lt(b[7] / p + b[8] / q, (P - p) / P),
        "E9": lt(tb[1], P * (Q - q) / Q),
        "E10": le(tb[2], Q - 1),
        "E11": lt(tb[3] / P + tb[4] / Q, (Q - q) / Q),
        "E12": lt(tb[5], p * (Q - q) / Q),
        "E13": le(tb[6], q - 1),
        "E14": lt(tb[7] / p + tb[8] / q, (Q - q) / Q),
        "E15": le(c[1], Pl - 1),
        "E16": lt(c[2], Ql * (Pl - p) / Pl),
        "E17": lt(c[3] / Pl + c[4] / Ql, (Pl - p) / Pl),
        "E18": lt(tc[1], Pl * (Ql - q) / Ql),
        "E19": le(tc[2], Ql - 1),
        "E20": lt(tc[3] / Pl + tc[4] / Ql, (Ql - q) / Ql),
    }
    if table == "dirichlet":
        out = {k: v for k, v in out.items() if int(k[1:]) <= 14}
    return out


def random_tuple(rng, lo=0.0, hi=10.0, override=20.0):
    """Random exponent dict in the acceptance ranges."""
    d = {"p": rng.uniform(1.0001, 5), "q": rng.uniform(1.0001, 5), "N": int(rng.choice([2, 3, 4]))}
    for k in ["r1", "r2"] + [f"b{i}" for i in range(1, 9)] + [f"tb{i}" for i in range(1, 9)] \
            + [f"c{i}" for i in range(1, 5)] + [f"tc{i}" for i in range(1, 5)]:
        d[k] = rng.uniform(lo, hi)
    if d["p"] >= d["N"] or d["q"] >= d["N"]:
        d["working_exponent_override"] = override
    return d


def random_admissible(rng):
    """Rejection-free construction of a strictly admissible tuple: each
    exponent is a random fraction of its bound."""
    p, q, N = rng.uniform(1.05, 4.9), rng.uniform(1.05, 4.9), int(rng.choice([2, 3, 4]))
    ov = 20.0 if (p >= N or q >= N) else None
    P, Q = sobolev_exp(p, N, ov), sobolev_exp(q, N, ov)
    Pl, Ql = trace_exp(p, N, ov), trace_exp(q, N, ov)
    u = lambda: rng.uniform(0.0, 0.999)  # noqa: E731
    d = {"p": p, "q": q, "N": N}
    if ov is not None:
        d["working_exponent_override"] = ov
    d.update(r1=u() * P, r2=u() * Q, b1=u() * (P - 1), b2=u() * Q * (P - p) / P,
             b5=u() * (p - 1), b6=u() * q * (P - p) / P,
             tb1=u() * P * (Q - q) / Q, tb2=u() * (Q - 1), tb5=u() * p * (Q - q) / Q,
             tb6=u() * (q - 1), c1=u() * (Pl - 1), c2=u() * Ql * (Pl - p) / Pl,
             tc1=u() * Pl * (Ql - q) / Ql, tc2=u() * (Ql - 1))

    def pair(ra, rb, gap):
        w = rng.uniform(0, 1)
        f = u() * gap
        return w * f * ra, (1 - w) * f * rb

    d["b3"], d["b4"] = pair(P, Q, (P - p) / P)
    d["b7"], d["b8"] = pair(p, q, (P - p) / P)
    d["tb3"], d["tb4"] = pair(P, Q, (Q - q) / Q)
    d["tb7"], d["tb8"] = pair(p, q, (Q - q) / Q)
    d["c3"], d["c4"] = pair(Pl, Ql, (Pl - p) / Pl)
    d["tc3"], d["tc4"] = pair(Pl, Ql, (Ql - q) / Ql)
    # occasionally zero out a family to exercise the omitted-term paths
    for group in (["b2"], ["b6"], ["b3", "b4"], ["b7", "b8"], ["c2"], ["c3", "c4"]):
        if rng.random() < 0.15:
            for k in group:
                d[k] = 0.0
    return d


# linear coupled system on an interval ------------------------------------------


def linear_1d_monolithic(n):
    """Direct solve of the linear manufactured problem on (0, 1).

    Strong form (sources derived by hand):
      -u'' = -u + 0.5 v + f1,        f1 = 2 + u* - 0.5 v*
      -v'' = -v + 0.3 u + f2,        f2 = (pi^2 + 1) sin(pi x) - 0.3 u*
      flux conditions: u' nu = -0.5 u - 1, v' nu = -0.5 v + 0.2 u - pi
    with u* = x(1-x), v* = sin(pi x).  P1 elements with Simpson's rule.
    """
    x = np.linspace(0.0, 1.0, n + 1)
    h = np.diff(x)
    m = n + 1
    K = np.zeros((m, m))
    M = np.zeros((m, m))
    F1, F2 = np.zeros(m), np.zeros(m)
    ustar = lambda z: z * (1 - z)  # noqa: E731
    vstar = lambda z: np.sin(np.pi * z)  # noqa: E731
    f1 = lambda z: 2 + ustar(z) - 0.5 * vstar(z)  # noqa: E731
    f2 = lambda z: (np.pi**2 + 1) * vstar(z) - 0.3 * ustar(z)  # noqa: E731
    for e in range(n):
        a, b = e, e + 1
        xa, xb = x[a], x[b]
        xm = 0.5 * (xa + xb)
        K[np.ix_([a, b], [a, b])] += np.array([[1, -1], [-1, 1]]) / h[e]
        # Simpson on phi_i phi_j (basis is 1/0 at the ends, 1/2 at the midpoint)
        M[np.ix_([a, b], [a, b])] += h[e] / 6 * np.array([[2.0, 1.0], [1.0, 2.0]])
        for F, f in ((F1, f1), (F2, f2)):
            F[a] += h[e] / 6 * (f(xa) + 4 * f(xm) * 0.5)
            F[b] += h[e] / 6 * (4 * f(xm) * 0.5 + f(xb))
    I0 = np.zeros((m, m))
    I0[0, 0] = I0[-1, -1] = 1.0
    # K u - (-M u + 0.5 M v) - (-0.5 u - 1) at ends = F1
    A = np.block([
        [K + M + 0.5 * I0, -0.5 * M],
        [-0.3 * M - 0.2 * I0, K + M + 0.5 * I0],
    ])
    rhs = np.concatenate([F1, F2])
    rhs[0] += -1.0
    rhs[m - 1] += -1.0
    rhs[m] += -math.pi
    rhs[2 * m - 1] += -math.pi
    sol = np.linalg.solve(A, rhs)
    return x, sol[:m], sol[m:]
