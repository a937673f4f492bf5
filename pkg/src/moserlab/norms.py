"""Discrete Lebesgue and Sobolev norms, truncations, norm ladders along
geometric exponent schedules, tail functionals, and the empirical
boundedness certificate for solved fields."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NegativeInput, NotConverged
from .hypotheses import HolderSplit, IterationSchedule, SystemExponents, critical_set, holder_split
from .mesh import Field
from .solver import SolutionPair

BOUNDED, GROWING = "BOUNDED", "GROWING"
VERDICT_SLACK = 1e-6


def sign_split(u: Field) -> tuple[Field, Field]:
    """Nodal positive and negative parts, ``u = u+ - u-`` and ``|u| = u+ + u-``."""
    return u.with_values(np.maximum(u.values, 0.0)), u.with_values(np.maximum(-u.values, 0.0))


def _require_nonnegative(u: Field, what="field"):
    if np.any(u.values < 0):
        raise NegativeInput(f"{what} has negative nodal values; apply sign_split first")


def truncate(u: Field, h: float) -> Field:
    """Nodal ``min(u, h)`` for a nonnegative field."""
    if h < 0:
        raise ValueError("truncation level must be nonnegative")
    _require_nonnegative(u)
    return u.with_values(np.minimum(u.values, h))


def _check_r(r):
    if not r >= 1:
        raise ValueError(f"norm exponent must be >= 1, got {r}")


def _norm(values, weights, r) -> float:
    """``(sum w |v|^r)^(1/r)`` with the maximum factored out first."""
    m, S = kernels.power_sum(np.ascontiguousarray(values, dtype=float).ravel(),
                             np.ascontiguousarray(weights, dtype=float).ravel(), float(r))
    if m == 0.0:
        return 0.0
    return m * S ** (1.0 / r)


def _log_norm(logs, weights, r) -> float:
    """Natural log of ``(sum w exp(r l))^(1/r)``; ``-inf`` for a zero field.

    Keeps products like ``u u_h^kappa`` representable when the powers would
    underflow.
    """
    logs = np.asarray(logs, dtype=float).ravel()
    top = float(np.max(logs)) if logs.size else -math.inf
    if top == -math.inf:
        return -math.inf
    m, S = kernels.power_sum(np.exp(logs - top), np.asarray(weights, dtype=float).ravel(), float(r))
    return top + math.log(m) + math.log(S) / r


def naive_norm(values, weights, r) -> float:
    """Direct ``(sum w |v|^r)^(1/r)``; overflows for large ``r``."""
    with np.errstate(over="ignore"):
        return float(np.sum(np.asarray(weights) * np.abs(np.asarray(values)) ** r) ** (1.0 / r))


def lr_norm(u: Field, r: float, normalized: bool = False) -> float:
    """Quadrature L^r norm of the P1 interpolant.

    The working rule contains the vertices, so the normalized norm never
    exceeds the nodal maximum of ``|u|`` and tends to it as ``r`` grows.
    """
    _check_r(r)
    mesh = u.mesh
    W = mesh.quad_W / mesh.domain.measure if normalized else mesh.quad_W
    return _norm(mesh.interpolate(u.values), W, r)


def boundary_lr_norm(u: Field, r: float, normalized: bool = False) -> float:
    """L^r norm of the trace over the boundary facets (unit point measure in 1D)."""
    _check_r(r)
    mesh = u.mesh
    W = mesh.facet_W / mesh.domain.boundary_measure if normalized else mesh.facet_W
    return _norm(mesh.interpolate_facets(u.values), W, r)


def gradient_lr_norm(u: Field, r: float, normalized: bool = False) -> float:
    """``(int |grad u|^r)^(1/r)``; the P1 gradient is constant per element."""
    _check_r(r)
    mesh = u.mesh
    g = np.linalg.norm(mesh.element_gradients(u.values), axis=1)
    W = mesh.element_measures / mesh.domain.measure if normalized else mesh.element_measures
    return _norm(g, W, r)


def sobolev_norm(u: Field, r: float) -> float:
    """``||u||_{1,r} = ||grad u||_r + ||u||_r``."""
    return gradient_lr_norm(u, r) + lr_norm(u, r)


# ladders ---------------------------------------------------------------------


@dataclass(frozen=True)
class LadderEntry:
    alpha: float
    interior_norm: float
    boundary_norm: float


@dataclass(frozen=True)
class NormLadder:
    """Norms of a nonnegative field along an exponent schedule.

    On a finite mesh every field is bounded, so ``BOUNDED`` is the expected
    verdict for normalized ladders; the informative numbers are
    ``sup_ratio_to_max`` and ``final_gap``, which show how fast the norms
    approach the nodal maximum.
    """

    entries: tuple[LadderEntry, ...]
    normalized: bool
    verdict: str | None
    sup_ratio_to_max: float
    nodal_max: float
    boundary_max: float
    mode: str = "interior"

    @property
    def alphas(self) -> list[float]:
        return [e.alpha for e in self.entries]

    @property
    def interior(self) -> list[float]:
        return [e.interior_norm for e in self.entries]

    @property
    def boundary(self) -> list[float]:
        return [e.boundary_norm for e in self.entries]

    @property
    def final_gap(self) -> float:
        """Relative distance of the last interior entry below the nodal max."""
        if self.nodal_max == 0:
            return 0.0
        return 1.0 - self.entries[-1].interior_norm / self.nodal_max

    def to_mapping(self) -> dict:
        return {
            "mode": self.mode,
            "normalized": self.normalized,
            "verdict": self.verdict,
            "sup_ratio_to_max": self.sup_ratio_to_max,
            "nodal_max": self.nodal_max,
            "boundary_max": self.boundary_max,
            "final_gap": self.final_gap,
            "alphas": list(self.alphas),
            "interior": list(self.interior),
            "boundary": list(self.boundary),
            "entries": [
                {"alpha": e.alpha, "interior_norm": e.interior_norm, "boundary_norm": e.boundary_norm}
                for e in self.entries
            ],
        }


def ladder(u: Field, sched: IterationSchedule | list, normalized: bool = True) -> NormLadder:
    """Interior and boundary norms of ``u >= 0`` at each ``alpha`` of the
    schedule (or of an explicit increasing list of exponents).

    Raw (un-normalized) ladders carry no verdict, since the measure factor
    may make them decrease.
    """
    _require_nonnegative(u)
    if isinstance(sched, IterationSchedule):
        alphas, mode = list(sched.alphas), sched.mode
    else:
        alphas, mode = [float(a) for a in sched], "explicit"
    if not alphas:
        raise ValueError("schedule is empty")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("exponents must be strictly increasing")
    entries = tuple(
        LadderEntry(a, lr_norm(u, a, normalized), boundary_lr_norm(u, a, normalized))
        for a in alphas
    )
    umax = u.abs_max
    bmax = float(np.max(np.abs(u.values[u.mesh.boundary_vertices])))
    top = max(e.interior_norm for e in entries)
    ratio = top / umax if umax > 0 else 1.0
    verdict = None
    if normalized:
        verdict = BOUNDED if ratio <= 1.0 + VERDICT_SLACK else GROWING
    return NormLadder(entries, normalized, verdict, ratio, umax, bmax, mode)


def tail_functionals(u: Field, p: float, p_star: float, p_lower: float, thresholds):
    """Super-level-set tails of ``a = u^(p*-p)`` and ``b = u^(p_*-p)``.

    ``H(L) = (int_{a>L} a^(p*/(p*-p)))^((p*-p)/p*)`` over the domain and the
    analogous ``K(G)`` over the boundary.  Both vanish once the threshold
    reaches the discrete maximum, because the working quadrature never
    exceeds nodal extrema.
    """
    _require_nonnegative(u)
    if not (math.isfinite(p_star) and p < p_star):
        raise ValueError("need a finite p_star > p")
    if not (math.isfinite(p_lower) and p < p_lower):
        raise ValueError("need a finite p_lower > p")
    mesh = u.mesh
    ui, ub = mesh.interpolate(u.values), mesh.interpolate_facets(u.values)
    ai, bb = ui ** (p_star - p), ub ** (p_lower - p)
    H, K = [], []
    for L in thresholds:
        sel = ai > L
        H.append(_norm(ui[sel], mesh.quad_W[sel], p_star) ** (p_star - p) if sel.any() else 0.0)
        sel = bb > L
        K.append(_norm(ub[sel], mesh.facet_W[sel], p_lower) ** (p_lower - p) if sel.any() else 0.0)
    return H, K


# certificate -----------------------------------------------------------------


@dataclass(frozen=True)
class CertificateReport:
    """Empirical constants in the reverse-Hoelder step of the iteration.

    ``ratios[i][j]`` is ``R = ||w||_{1,p}^p / (||w||_{ps}^p + 1)`` for
    ``w = u u_h^kappa`` at ``kappa_values[i]`` and ``h_values[j]``;
    ``boundary_ratios`` use ``||w||_{pt, boundary}`` in the denominator.
    ``growth_fit`` is the slope of ``log sup_h R`` against ``log(kappa+1)``.
    """

    kappa_values: tuple[float, ...]
    h_values: tuple[float, ...]
    ratios: tuple[tuple[float, ...], ...]
    boundary_ratios: tuple[tuple[float, ...], ...]
    log_ratios: tuple[tuple[float, ...], ...]
    growth_fit: float
    boundary_growth_fit: float
    monotone_in_h: bool
    tail_thresholds: tuple[float, ...]
    tail_H: tuple[float, ...]
    tail_K: tuple[float, ...]
    p: float
    s: float
    t: float

    def to_mapping(self) -> dict:
        return {
            "p": self.p, "s": self.s, "t": self.t,
            "kappa_values": list(self.kappa_values),
            "h_values": list(self.h_values),
            "ratios": [list(r) for r in self.ratios],
            "boundary_ratios": [list(r) for r in self.boundary_ratios],
            "log_ratios": [list(r) for r in self.log_ratios],
            "growth_fit": self.growth_fit,
            "boundary_growth_fit": self.boundary_growth_fit,
            "monotone_in_h": self.monotone_in_h,
            "tail_thresholds": list(self.tail_thresholds),
            "tail_H": list(self.tail_H),
            "tail_K": list(self.tail_K),
        }


def _safe_log(a):
    with np.errstate(divide="ignore"):
        return np.log(a)


def _product_logs(u, uh, kappa):
    """Log of ``u uh^kappa`` pointwise (``-inf`` where it vanishes)."""
    out = _safe_log(u)
    if kappa > 0:
        out = out + kappa * _safe_log(uh)
    return out


def _product_log_gradient(mesh, u, h, kappa):
    """Log of ``|grad(u u_h^kappa)|`` at the working quadrature points, from the
    product rule on the P1 interpolants of ``u`` and ``u_h``."""
    uh_nodal = np.minimum(u, h)
    uq, uhq = mesh.interpolate(u), mesh.interpolate(uh_nodal)
    gu = mesh.element_gradients(u)[:, None, :]
    guh = mesh.element_gradients(uh_nodal)[:, None, :]
    if kappa == 0:
        mag = np.broadcast_to(np.linalg.norm(gu, axis=2), uq.shape)
        return _safe_log(mag)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(uhq > 0, uq / uhq, 0.0)
    inner = gu + kappa * ratio[:, :, None] * guh
    return kappa * _safe_log(uhq) + _safe_log(np.linalg.norm(inner, axis=2))


def _logaddexp(a, b):
    return float(np.logaddexp(a, b))


def _fit(kappas, sup_logs) -> float:
    x = np.log(np.asarray(kappas, dtype=float) + 1.0)
    y = np.asarray(sup_logs, dtype=float)
    ok = np.isfinite(y)
    if ok.sum() < 2 or np.ptp(x[ok]) == 0:
        return math.nan
    return float(np.polyfit(x[ok], y[ok], 1)[0])


def certify(pair: SolutionPair, exps: SystemExponents, split: HolderSplit | None = None,
            kappas=None, h_values=None, component: str = "u", thresholds=None) -> CertificateReport:
    """Tabulate ``R(kappa, h)`` for the positive part of a solved component.

    Defaults: ``kappas`` from the first six interior rungs of the schedule,
    ``h_values`` five levels ``linspace(0.2, 1, 5) * max u``.  For
    ``component="v"`` the exponents are mirrored so that ``q`` plays the role
    of ``p``; a given ``split`` must then belong to the mirrored tuple.
    All power sums are formed in log space, so deep rungs stay finite.
    """
    from .hypotheses import schedule

    if not pair.converged:
        raise NotConverged("certificate requires a converged solution pair")
    if component not in ("u", "v"):
        raise ValueError("component must be 'u' or 'v'")
    if component == "v":
        exps = exps.swapped()
    if split is None:
        split = holder_split(exps)
    field = pair.u if component == "u" else pair.v
    u_plus, _ = sign_split(field)
    mesh = u_plus.mesh
    u = u_plus.values
    umax = float(u.max())
    p, s, t = exps.p, split.s, split.t
    if kappas is None:
        kappas = schedule("interior", exps, split, n_max=6).kappas
    if h_values is None:
        h_values = np.linspace(0.2, 1.0, 5) * umax
    kappas = tuple(float(k) for k in kappas)
    h_values = tuple(float(h) for h in h_values)
    if any(k < 0 for k in kappas) or any(h < 0 for h in h_values):
        raise ValueError("kappa and h must be nonnegative")

    W, Wb = mesh.quad_W, mesh.facet_W
    uq, ub = mesh.interpolate(u), mesh.interpolate_facets(u)
    logs_R, logs_Rb = [], []
    for kappa in kappas:
        row, rowb = [], []
        for h in h_values:
            uh = np.minimum(u, h)
            lw = _product_logs(uq, mesh.interpolate(uh), kappa)
            lwb = _product_logs(ub, mesh.interpolate_facets(uh), kappa)
            lg = _product_log_gradient(mesh, u, h, kappa)
            l_sob = _logaddexp(_log_norm(lg, W, p), _log_norm(lw, W, p))
            num = p * l_sob
            row.append(num - _logaddexp(p * _log_norm(lw, W, p * s), 0.0))
            rowb.append(num - _logaddexp(p * _log_norm(lwb, Wb, p * t), 0.0))
        logs_R.append(row)
        logs_Rb.append(rowb)
    LR, LRb = np.array(logs_R), np.array(logs_Rb)
    with np.errstate(over="ignore"):
        R, Rb = np.exp(LR), np.exp(LRb)
    order = np.argsort(h_values)
    monotone = bool(np.all(np.diff(LR[:, order], axis=1) >= -1e-12))

    k = critical_set(exps)
    if thresholds is None:
        top = max(umax ** (k.p_star - p), umax ** (k.p_lower - p))
        thresholds = np.linspace(0.0, 1.25 * top, 6) if top > 0 else [0.0, 1.0]
    thresholds = tuple(float(x) for x in thresholds)
    H, K = tail_functionals(u_plus, p, k.p_star, k.p_lower, thresholds)
    return CertificateReport(
        kappa_values=kappas,
        h_values=h_values,
        ratios=tuple(tuple(map(float, r)) for r in R),
        boundary_ratios=tuple(tuple(map(float, r)) for r in Rb),
        log_ratios=tuple(tuple(map(float, r)) for r in LR),
        growth_fit=_fit(kappas, LR.max(axis=1)),
        boundary_growth_fit=_fit(kappas, LRb.max(axis=1)),
        monotone_in_h=monotone,
        tail_thresholds=thresholds,
        tail_H=tuple(H),
        tail_K=tuple(K),
        p=p, s=s, t=t,
    )
