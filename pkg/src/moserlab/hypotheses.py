"""Exponent algebra for coupled (p, q)-structure systems.

Critical Sobolev and trace exponents, the admissibility tables for the
growth exponents (strict, weak and Dirichlet variants), the Hölder
splitting exponents ``s`` and ``t`` that drive the Moser bootstrap, and the
geometric exponent schedules used along the iteration.

Finite exponents are plain floats; an unbounded critical exponent (``r >= N``)
is represented by :data:`UNBOUNDED` (``math.inf``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Iterable, Mapping

from .errors import MissingOverride, NotAdmissible, ParseError

UNBOUNDED = math.inf

B_KEYS = tuple(f"b{i}" for i in range(1, 9))
TB_KEYS = tuple(f"tb{i}" for i in range(1, 9))
C_KEYS = tuple(f"c{i}" for i in range(1, 5))
TC_KEYS = tuple(f"tc{i}" for i in range(1, 5))
GROWTH_KEYS = ("r1", "r2") + B_KEYS + TB_KEYS + C_KEYS + TC_KEYS

# Non-strict rows of the main table; every other row is strict.
NON_STRICT = frozenset({"E1", "E2", "E3", "E6", "E10", "E13", "E15", "E19"})
BOUNDARY_IDS = frozenset(f"E{i}" for i in range(15, 21))

E19_NOTE = (
    "E19 is printed as a bound on tc6, which does not occur in the growth "
    "conditions; it is evaluated here as a bound on tc2."
)


def critical_sobolev(r: float, N: int) -> float:
    """Interior critical exponent ``N r / (N - r)``; unbounded for ``r >= N``."""
    if r >= N:
        return UNBOUNDED
    return N * r / (N - r)


def critical_trace(r: float, N: int) -> float:
    """Boundary critical exponent ``(N - 1) r / (N - r)``; unbounded for ``r >= N``."""
    if r >= N:
        return UNBOUNDED
    return (N - 1) * r / (N - r)


def conjugate(s: float) -> float:
    """Hölder conjugate ``s / (s - 1)``, with ``conjugate(inf) == 1``."""
    if math.isinf(s):
        return 1.0
    return s / (s - 1.0)


@dataclass(frozen=True)
class SystemExponents:
    p: float
    q: float
    N: int
    r1: float = 0.0
    r2: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    b3: float = 0.0
    b4: float = 0.0
    b5: float = 0.0
    b6: float = 0.0
    b7: float = 0.0
    b8: float = 0.0
    tb1: float = 0.0
    tb2: float = 0.0
    tb3: float = 0.0
    tb4: float = 0.0
    tb5: float = 0.0
    tb6: float = 0.0
    tb7: float = 0.0
    tb8: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c4: float = 0.0
    tc1: float = 0.0
    tc2: float = 0.0
    tc3: float = 0.0
    tc4: float = 0.0
    working_exponent_override: float | None = None
    p1: float | None = None

    def __post_init__(self):
        if not self.p > 1 or not self.q > 1:
            raise ValueError(f"p and q must exceed 1, got p={self.p}, q={self.q}")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        for key in GROWTH_KEYS:
            value = getattr(self, key)
            if not value >= 0:
                raise ValueError(f"growth exponent {key} must be nonnegative, got {value}")
        override = self.working_exponent_override
        if override is not None and not (math.isfinite(override) and override > 1):
            raise ValueError(f"working_exponent_override must be finite and > 1, got {override}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "SystemExponents":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown exponent keys: {sorted(unknown)}")
        for key in ("p", "q", "N"):
            if key not in data:
                raise ParseError(f"missing required key {key!r}")
        kwargs = {}
        for key, value in data.items():
            if value is None:
                kwargs[key] = None
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParseError(f"key {key!r} must be numeric, got {value!r}")
            kwargs[key] = int(value) if key == "N" else float(value)
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc

    def to_mapping(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None and f.name in ("working_exponent_override", "p1"):
                continue
            out[f.name] = value
        return out

    def swapped(self) -> "SystemExponents":
        """Exponents of the system with the two equations exchanged.

        The second equation's own variable becomes the first one's, so e.g.
        ``tb2`` (own power in the second reaction) maps to ``b1``.
        """
        pairs = {
            "b1": "tb2", "b2": "tb1", "b3": "tb4", "b4": "tb3",
            "b5": "tb6", "b6": "tb5", "b7": "tb8", "b8": "tb7",
            "c1": "tc2", "c2": "tc1", "c3": "tc4", "c4": "tc3",
            "r1": "r2", "p": "q",
        }
        pairs.update({v: k for k, v in list(pairs.items())})
        return replace(self, **{k: getattr(self, v) for k, v in pairs.items()})


@dataclass(frozen=True)
class CriticalSet:
    p_star: float
    p_lower: float
    q_star: float
    q_lower: float


def critical_set(exps: SystemExponents) -> CriticalSet:
    """Critical exponents of ``p`` and ``q``, substituting the working exponent
    wherever the formulas are unbounded."""
    values = [
        critical_sobolev(exps.p, exps.N),
        critical_trace(exps.p, exps.N),
        critical_sobolev(exps.q, exps.N),
        critical_trace(exps.q, exps.N),
    ]
    if any(math.isinf(v) for v in values):
        override = exps.working_exponent_override
        if override is None:
            raise MissingOverride(
                f"p={exps.p} or q={exps.q} is >= N={exps.N}; "
                "a finite working_exponent_override is required"
            )
        values = [override if math.isinf(v) else v for v in values]
    return CriticalSet(*values)


@dataclass(frozen=True)
class Condition:
    id: str
    holds: bool | None
    lhs: float
    rhs: float
    strict: bool
    applicable: bool = True


@dataclass(frozen=True)
class ConditionReport:
    mode: str
    conditions: tuple[Condition, ...]
    critical: CriticalSet
    notes: tuple[str, ...] = ()

    @property
    def overall(self) -> bool:
        return all(c.holds for c in self.conditions if c.applicable)

    @property
    def failed(self) -> list[str]:
        return [c.id for c in self.conditions if c.applicable and not c.holds]

    def __getitem__(self, cid: str) -> Condition:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def to_mapping(self) -> dict:
        return {
            "mode": self.mode,
            "overall": self.overall,
            "critical": {
                "p_star": self.critical.p_star,
                "p_lower": self.critical.p_lower,
                "q_star": self.critical.q_star,
                "q_lower": self.critical.q_lower,
            },
            "conditions": [
                {
                    "id": c.id,
                    "holds": c.holds,
                    "lhs": c.lhs,
                    "rhs": c.rhs,
                    "strict": c.strict,
                    "applicable": c.applicable,
                }
                for c in self.conditions
            ],
            "failed": list(self.failed),
            "notes": list(self.notes),
        }


_Row = tuple[str, bool, Callable, Callable]


def _table(kind: str) -> list[_Row]:
    """Rows ``(id, strict, lhs(e, k), rhs(e, k))`` for ``kind`` in
    ``{"strict", "weak"}``; ``e`` are the exponents, ``k`` the critical set."""
    weak = kind == "weak"

    def mix(a, b):
        return lambda e, k: getattr(e, a) / k.p_star + getattr(e, b) / k.q_star

    def mix_grad(a, b):
        return lambda e, k: getattr(e, a) / e.p + getattr(e, b) / e.q

    def mix_bdry(a, b):
        return lambda e, k: getattr(e, a) / k.p_lower + getattr(e, b) / k.q_lower

    def attr(a):
        return lambda e, k: getattr(e, a)

    # Own-variable gap of each equation: (crit - p) in the strict table,
    # (crit - 1) in the weak one.
    def gap_p(k, e):
        return k.p_star - (1.0 if weak else e.p)

    def gap_q(k, e):
        return k.q_star - (1.0 if weak else e.q)

    def gap_pl(k, e):
        return k.p_lower - (1.0 if weak else e.p)

    def gap_ql(k, e):
        return k.q_lower - (1.0 if weak else e.q)

    rows: list[_Row] = [
        ("E1", False, attr("r1"), lambda e, k: k.p_star),
        ("E2", False, attr("r2"), lambda e, k: k.q_star),
        ("E3", False, attr("b1"), lambda e, k: k.p_star - 1),
        ("E4", True, attr("b2"), lambda e, k: k.q_star / k.p_star * gap_p(k, e)),
        ("E5", True, mix("b3", "b4"), lambda e, k: gap_p(k, e) / k.p_star),
        ("E6", False, attr("b5"), lambda e, k: e.p - 1),
        ("E7", True, attr("b6"), lambda e, k: e.q / k.p_star * gap_p(k, e)),
        ("E8", True, mix_grad("b7", "b8"), lambda e, k: gap_p(k, e) / k.p_star),
        ("E9", True, attr("tb1"), lambda e, k: k.p_star / k.q_star * gap_q(k, e)),
        ("E10", False, attr("tb2"), lambda e, k: k.q_star - 1),
        ("E11", True, mix("tb3", "tb4"), lambda e, k: gap_q(k, e) / k.q_star),
        ("E12", True, attr("tb5"), lambda e, k: e.p / k.q_star * gap_q(k, e)),
        ("E13", False, attr("tb6"), lambda e, k: e.q - 1),
        ("E14", True, mix_grad("tb7", "tb8"), lambda e, k: gap_q(k, e) / k.q_star),
        ("E15", False, attr("c1"), lambda e, k: k.p_lower - 1),
        ("E16", True, attr("c2"), lambda e, k: k.q_lower / k.p_lower * gap_pl(k, e)),
        ("E17", True, mix_bdry("c3", "c4"), lambda e, k: gap_pl(k, e) / k.p_lower),
        ("E18", True, attr("tc1"), lambda e, k: k.p_lower / k.q_lower * gap_ql(k, e)),
        ("E19", False, attr("tc2"), lambda e, k: k.q_lower - 1),
        ("E20", True, mix_bdry("tc3", "tc4"), lambda e, k: gap_ql(k, e) / k.q_lower),
    ]
    if weak:
        # Rows that differ between the tables become primed and non-strict.
        rows = [
            (cid, False, lhs, rhs) if cid in NON_STRICT else (cid + "'", False, lhs, rhs)
            for cid, _, lhs, rhs in rows
        ]
    return rows


def _evaluate(mode: str, exps: SystemExponents, rows: Iterable[_Row], skip=frozenset()):
    crit = critical_set(exps)
    out = []
    for cid, strict, lhs_fn, rhs_fn in rows:
        lhs = float(lhs_fn(exps, crit))
        rhs = float(rhs_fn(exps, crit))
        if cid.rstrip("'") in skip:
            out.append(Condition(cid, None, lhs, rhs, strict, applicable=False))
            continue
        holds = lhs < rhs if strict else lhs <= rhs
        out.append(Condition(cid, bool(holds), lhs, rhs, strict))
    notes = (E19_NOTE,) if "E19" not in skip else ()
    return ConditionReport(mode, tuple(out), crit, notes)


def check_strict(exps: SystemExponents) -> ConditionReport:
    """Evaluate the twenty growth conditions needed for the Moser iteration."""
    return _evaluate("strict", exps, _table("strict"))


def check_weak(exps: SystemExponents) -> ConditionReport:
    """Evaluate the weaker conditions under which the weak formulation is
    well defined (primed rows, all non-strict)."""
    return _evaluate("weak", exps, _table("weak"))


def check_dirichlet(exps: SystemExponents) -> ConditionReport:
    """Conditions for homogeneous Dirichlet data: E1-E14 only, the boundary
    rows are reported as not applicable."""
    return _evaluate("dirichlet", exps, _table("strict"), skip=BOUNDARY_IDS)


CHECKS = {"strict": check_strict, "weak": check_weak, "dirichlet": check_dirichlet}


@dataclass(frozen=True)
class HolderSplit:
    """Hölder exponents of the first equation.

    ``s1, s2, t1`` satisfy ``b2 s1 = q*``, ``b6 s2 = q``, ``c2 t1 = q_*``;
    ``(x_i, y_i, z_i)`` are the three-factor splittings of the mixed terms.
    An exponent whose power is zero is stored as ``inf``.
    """

    s1: float
    s2: float
    t1: float
    x1: float
    y1: float
    z1: float
    x2: float
    y2: float
    z2: float
    x3: float
    y3: float
    z3: float
    s: float
    t: float
    critical: CriticalSet
    omitted_terms: tuple[str, ...] = field(default=())

    @property
    def s1_conj(self) -> float:
        return conjugate(self.s1)

    @property
    def s2_conj(self) -> float:
        return conjugate(self.s2)

    @property
    def t1_conj(self) -> float:
        return conjugate(self.t1)

    def to_mapping(self) -> dict:
        out = {name: getattr(self, name) for name in (
            "s1", "s2", "t1", "x1", "y1", "z1", "x2", "y2", "z2", "x3", "y3", "z3", "s", "t")}
        out["s1_conj"] = self.s1_conj
        out["s2_conj"] = self.s2_conj
        out["t1_conj"] = self.t1_conj
        out["omitted_terms"] = list(self.omitted_terms)
        return out


def _ratio(target: float, power: float) -> float:
    return math.inf if power == 0 else target / power


def _three_factor(power_a, target_a, power_b, target_b):
    x = _ratio(target_a, power_a)
    y = _ratio(target_b, power_b)
    inv_z = 1.0 - power_a / target_a - power_b / target_b
    return x, y, 1.0 / inv_z


def holder_split(exps: SystemExponents) -> HolderSplit:
    """Hölder exponents and the integrability orders ``s, t`` of the first
    equation.

    Terms whose powers vanish carry no integrability constraint; they are
    listed in ``omitted_terms`` by condition id and left out of the maxima.
    When every term is omitted the midpoint of the admissible interval is used.
    """
    report = check_strict(exps)
    if not report.overall:
        raise NotAdmissible(f"strict conditions fail: {', '.join(report.failed)}")
    k = report.critical
    e = exps

    s1 = _ratio(k.q_star, e.b2)
    s2 = _ratio(e.q, e.b6)
    t1 = _ratio(k.q_lower, e.c2)
    x1, y1, z1 = _three_factor(e.b3, k.p_star, e.b4, k.q_star)
    x2, y2, z2 = _three_factor(e.b7, e.p, e.b8, e.q)
    x3, y3, z3 = _three_factor(e.c3, k.p_lower, e.c4, k.q_lower)

    omitted = []
    interior = []
    for cid, active, value in (
        ("E4", e.b2 > 0, conjugate(s1)),
        ("E7", e.b6 > 0, conjugate(s2)),
        ("E5", e.b3 > 0 or e.b4 > 0, z1),
        ("E8", e.b7 > 0 or e.b8 > 0, z2),
    ):
        if active:
            interior.append(value)
        else:
            omitted.append(cid)
    boundary = []
    for cid, active, value in (
        ("E16", e.c2 > 0, conjugate(t1)),
        ("E17", e.c3 > 0 or e.c4 > 0, z3),
    ):
        if active:
            boundary.append(value)
        else:
            omitted.append(cid)

    s = max(interior) if interior else 0.5 * (1.0 + k.p_star / e.p)
    t = max(boundary) if boundary else 0.5 * (1.0 + k.p_lower / e.p)
    return HolderSplit(
        s1, s2, t1, x1, y1, z1, x2, y2, z2, x3, y3, z3, s, t,
        critical=k, omitted_terms=tuple(omitted),
    )


@dataclass(frozen=True)
class IterationSchedule:
    mode: str
    kappas: tuple[float, ...]
    alphas: tuple[float, ...]
    base: float
    ratio: float
    kappa0: float = 0.0
    p1: float | None = None

    def to_mapping(self) -> dict:
        out = {
            "mode": self.mode,
            "base": self.base,
            "ratio": self.ratio,
            "kappa0": self.kappa0,
            "kappas": list(self.kappas),
            "alphas": list(self.alphas),
        }
        if self.p1 is not None:
            out["p1"] = self.p1
        return out


SCHEDULE_MODES = ("interior", "boundary", "linfty")


def default_p1(exps: SystemExponents, split: HolderSplit) -> float:
    return 0.5 * (exps.p * split.s + split.critical.p_star)


def schedule(
    mode: str,
    exps: SystemExponents,
    split: HolderSplit,
    kappa0: float = 0.0,
    n_max: int = 6,
    p1: float | None = None,
) -> IterationSchedule:
    """Geometric exponent ladder ``alpha_n = (kappa_n + 1) * base``, ``n = 1..n_max``.

    ``kappa_n + 1 = (kappa0 + 1) * ratio**n`` with ratio ``p*/(p s)`` in the
    interior, ``p_*/(p t)`` on the boundary and ``p*/p1`` for the
    L-infinity stage, where ``p1`` lies in ``(p s, p*)``.
    """
    if mode not in SCHEDULE_MODES:
        raise ValueError(f"unknown schedule mode {mode!r}")
    if kappa0 < 0:
        raise ValueError("kappa0 must be nonnegative")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    k = split.critical
    if mode == "interior":
        base, ratio = k.p_star, k.p_star / (exps.p * split.s)
    elif mode == "boundary":
        base, ratio = k.p_lower, k.p_lower / (exps.p * split.t)
    else:
        if p1 is None:
            p1 = exps.p1 if exps.p1 is not None else default_p1(exps, split)
        if not exps.p * split.s < p1 < k.p_star:
            raise NotAdmissible(f"p1={p1} must lie in ({exps.p * split.s}, {k.p_star})")
        base, ratio = k.p_star, k.p_star / p1
    if not ratio > 1:
        raise NotAdmissible(f"schedule ratio {ratio} is not > 1")
    growth = [(kappa0 + 1.0) * ratio**n for n in range(1, n_max + 1)]
    return IterationSchedule(
        mode=mode,
        kappas=tuple(g - 1.0 for g in growth),
        alphas=tuple(g * base for g in growth),
        base=base,
        ratio=ratio,
        kappa0=kappa0,
        p1=p1 if mode == "linfty" else None,
    )
