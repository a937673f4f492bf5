"""Coefficient functions of the coupled system as a closed catalog.

The leading parts are regularized power fluxes
``a(xi) = (|xi|^2 + eps^2)^((p-2)/2) xi``; reactions and boundary terms are
finite sums of signed monomials in ``|s|, |t|, |xi|, |zeta|`` plus a
closed-form source in the space variables.  Growth envelopes of the form
(H1)-(H8) are declared alongside and can be verified by sampling.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import DomainMismatch, ParseError, UnknownPreset
from .hypotheses import SystemExponents
from .mesh import Domain, unit_interval, unit_square

SIGNS = ("+", "-", "sign_s", "sign_t")
WHICH = ("A1", "A2", "B1", "B2", "C1", "C2")

_X, _Y, _NX, _NY = sp.symbols("x y nx ny", real=True)
_SYMBOLS = {"x": _X, "y": _Y, "nx": _NX, "ny": _NY}


class StructureMismatch(ValueError):
    """A catalog term does not fit the declared growth exponents."""


@lru_cache(maxsize=256)
def _compile(text: str):
    try:
        expr = sp.sympify(text, locals=dict(_SYMBOLS))
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ParseError(f"cannot parse expression {text!r}: {exc}") from exc
    unknown = expr.free_symbols - set(_SYMBOLS.values())
    if unknown:
        raise ParseError(f"expression {text!r} uses unknown symbols {sorted(map(str, unknown))}")
    fn = sp.lambdify((_X, _Y, _NX, _NY), expr, modules="numpy")
    return expr, fn


@dataclass(frozen=True)
class Expression:
    """Closed-form function of ``x, y`` (and, on the boundary, of the outward
    normal ``nx, ny``), stored as text."""

    text: str = "0"

    def __post_init__(self):
        _compile(self.text)

    @classmethod
    def from_sympy(cls, expr) -> "Expression":
        return cls(str(sp.sympify(expr)))

    @property
    def sympy(self):
        return _compile(self.text)[0]

    def __call__(self, points, normals=None) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, pts.shape[-1])
        cols = [flat[:, 0], flat[:, 1] if flat.shape[1] > 1 else np.zeros(len(flat))]
        if normals is None:
            ncols = [np.zeros(len(flat)), np.zeros(len(flat))]
        else:
            nrm = np.broadcast_to(np.asarray(normals, dtype=float), pts.shape).reshape(flat.shape)
            ncols = [nrm[:, 0], nrm[:, 1] if nrm.shape[1] > 1 else np.zeros(len(flat))]
        out = _compile(self.text)[1](*cols, *ncols)
        return np.broadcast_to(np.asarray(out, dtype=float), (len(flat),)).reshape(shape).copy()

    def gradient(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        d = pts.shape[-1]
        comps = [Expression.from_sympy(sp.diff(self.sympy, s)) for s in (_X, _Y)[:d]]
        return np.stack([c(pts) for c in comps], axis=-1)


@dataclass(frozen=True)
class Monomial:
    """``coeff * |s|^s * |t|^t * |xi|^xi * |zeta|^zeta * carrier``."""

    coeff: float
    s: float = 0.0
    t: float = 0.0
    xi: float = 0.0
    zeta: float = 0.0
    sign: str = "+"

    def __post_init__(self):
        if self.sign not in SIGNS:
            raise ValueError(f"sign carrier must be one of {SIGNS}, got {self.sign!r}")
        for name in ("s", "t", "xi", "zeta"):
            if getattr(self, name) < 0:
                raise ValueError(f"monomial exponent {name} must be nonnegative")

    def carrier(self, s, t):
        if self.sign == "+":
            return 1.0
        if self.sign == "-":
            return -1.0
        return np.sign(s) if self.sign == "sign_s" else np.sign(t)

    def magnitude(self, s, t, xi, zeta):
        return (np.abs(s) ** self.s * np.abs(t) ** self.t
                * np.asarray(xi) ** self.xi * np.asarray(zeta) ** self.zeta)

    def value(self, s, t, xi, zeta):
        """``xi`` and ``zeta`` are gradient magnitudes."""
        return self.coeff * self.magnitude(s, t, xi, zeta) * self.carrier(s, t)

    def derivative(self, s, t, xi, zeta, wrt: str):
        """Derivative in ``s`` or ``t``; infinite slopes at zero are set to 0."""
        e = getattr(self, wrt)
        shape = np.broadcast(s, t, xi, zeta).shape
        if e == 0:
            return np.zeros(shape)
        var, other = (s, t) if wrt == "s" else (t, s)
        other_e = self.t if wrt == "s" else self.s
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = e * np.abs(var) ** (e - 1.0)
        slope = np.where(np.isfinite(slope), slope, 0.0)
        rest = np.abs(other) ** other_e * np.asarray(xi) ** self.xi * np.asarray(zeta) ** self.zeta
        if self.sign == ("sign_s" if wrt == "s" else "sign_t"):
            sgn = 1.0
        else:
            sgn = np.sign(var) * self.carrier(s, t)
        return np.broadcast_to(self.coeff * slope * rest * sgn, shape)

    def swapped(self) -> "Monomial":
        sign = {"sign_s": "sign_t", "sign_t": "sign_s"}.get(self.sign, self.sign)
        return Monomial(self.coeff, self.t, self.s, self.zeta, self.xi, sign)

    def sympy(self, s, t, xi, zeta):
        carrier = {"+": 1, "-": -1, "sign_s": sp.sign(s), "sign_t": sp.sign(t)}[self.sign]
        out = sp.nsimplify(self.coeff) * carrier
        for base, power in ((s, self.s), (t, self.t), (xi, self.xi), (zeta, self.zeta)):
            if power:
                out *= sp.Abs(base) ** sp.nsimplify(power)
        return out


@dataclass(frozen=True)
class Leading:
    p: float
    eps: float = 0.0

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError("flux exponent must exceed 1")
        if self.eps < 0:
            raise ValueError("regularization must be nonnegative")

    def flux(self, grad: np.ndarray, eps: float | None = None) -> np.ndarray:
        eps = self.eps if eps is None else eps
        g2 = np.sum(grad * grad, axis=-1) + eps * eps
        if self.p == 2:
            return np.array(grad, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = g2 ** ((self.p - 2) / 2)
        w = np.where(g2 == 0, 0.0 if self.p > 2 else np.inf, w)
        out = w[..., None] * grad
        return np.where(np.isnan(out), 0.0, out)


@dataclass(frozen=True)
class Terms:
    """A reaction or boundary coefficient: monomials plus a source."""

    terms: tuple[Monomial, ...] = ()
    source: Expression = field(default_factory=Expression)

    def value(self, X, s, t, xi, zeta, normals=None):
        out = self.source(X, normals)
        for m in self.terms:
            out = out + m.value(s, t, xi, zeta)
        return out

    def derivative(self, s, t, xi, zeta, wrt):
        out = np.zeros(np.broadcast(s, t, xi, zeta).shape)
        for m in self.terms:
            out = out + m.derivative(s, t, xi, zeta, wrt)
        return out

    def swapped(self) -> "Terms":
        return Terms(tuple(m.swapped() for m in self.terms), self.source)


ENVELOPE_KEYS = (
    tuple(f"A{i}" for i in range(1, 7)) + tuple(f"tA{i}" for i in range(1, 7))
    + tuple(f"B{i}" for i in range(1, 8)) + tuple(f"tB{i}" for i in range(1, 8))
    + tuple(f"C{i}" for i in range(1, 5)) + tuple(f"tC{i}" for i in range(1, 5))
)


@dataclass(frozen=True)
class Envelope:
    """Nonnegative constants of the growth bounds (H1)-(H8)."""

    values: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        data = dict(self.values)
        unknown = set(data) - set(ENVELOPE_KEYS)
        if unknown:
            raise ValueError(f"unknown envelope constants {sorted(unknown)}")
        if any(v < 0 for v in data.values()):
            raise ValueError("envelope constants must be nonnegative")
        object.__setattr__(self, "values", tuple(sorted(data.items())))

    @classmethod
    def of(cls, **kw) -> "Envelope":
        return cls(tuple(kw.items()))

    def __getitem__(self, key: str) -> float:
        return dict(self.values).get(key, 0.0)

    def to_mapping(self) -> dict:
        return {k: self[k] for k in ENVELOPE_KEYS}

    def swapped(self) -> "Envelope":
        pairs = {f"A{i}": f"tA{i}" for i in range(1, 7)}
        pairs.update({"B1": "tB2", "B2": "tB1", "B3": "tB3", "B4": "tB5", "B5": "tB4",
                      "B6": "tB6", "B7": "tB7", "C1": "tC2", "C2": "tC1", "C3": "tC3",
                      "C4": "tC4"})
        full = dict(pairs)
        full.update({v: k for k, v in pairs.items()})
        return Envelope(tuple((full[k], v) for k, v in self.values))


# Envelope slots per coefficient: nonzero exponent pattern -> (exponent keys,
# whether the term's exponents must equal the declared ones).
def _slots(which: str):
    if which == "B1":
        e = ["b1", "b2", ("b3", "b4"), "b5", "b6", ("b7", "b8")]
    elif which == "B2":
        e = ["tb1", "tb2", ("tb3", "tb4"), "tb5", "tb6", ("tb7", "tb8")]
    elif which == "C1":
        e = ["c1", "c2", ("c3", "c4")]
    else:
        e = ["tc1", "tc2", ("tc3", "tc4")]
    patterns = [("s",), ("t",), ("s", "t"), ("xi",), ("zeta",), ("xi", "zeta")]
    return dict(zip(patterns, e))


@dataclass(frozen=True)
class StructureSpec:
    exponents: SystemExponents
    leading1: Leading
    leading2: Leading
    reaction1: Terms = field(default_factory=Terms)
    reaction2: Terms = field(default_factory=Terms)
    boundary1: Terms = field(default_factory=Terms)
    boundary2: Terms = field(default_factory=Terms)
    envelope: Envelope = field(default_factory=Envelope)
    domain: Domain | None = None
    label: str = ""

    def __post_init__(self):
        e = self.exponents
        if self.leading1.p != e.p or self.leading2.p != e.q:
            raise StructureMismatch(
                f"flux exponents ({self.leading1.p}, {self.leading2.p}) differ from "
                f"declared (p, q) = ({e.p}, {e.q})"
            )
        for which, coeff in (("B1", self.reaction1), ("B2", self.reaction2),
                             ("C1", self.boundary1), ("C2", self.boundary2)):
            slots = _slots(which)
            for m in coeff.terms:
                pattern = tuple(k for k in ("s", "t", "xi", "zeta") if getattr(m, k) > 0)
                if not pattern:
                    continue
                if pattern not in slots:
                    raise StructureMismatch(f"{which} term {m} fits no envelope slot")
                keys = slots[pattern]
                if isinstance(keys, tuple):
                    declared = [getattr(e, k) for k in keys]
                    if [getattr(m, k) for k in pattern] != declared:
                        raise StructureMismatch(
                            f"{which} mixed term {m} must carry the declared exponents {keys}")
                elif getattr(m, pattern[0]) > getattr(e, keys):
                    raise StructureMismatch(
                        f"{which} term {m} exceeds declared exponent {keys}={getattr(e, keys)}")

    @property
    def dim(self) -> int | None:
        return None if self.domain is None else self.domain.dim

    def swapped(self) -> "StructureSpec":
        """The same system with the two equations (and unknowns) exchanged."""
        return StructureSpec(
            exponents=self.exponents.swapped(),
            leading1=self.leading2,
            leading2=self.leading1,
            reaction1=self.reaction2.swapped(),
            reaction2=self.reaction1.swapped(),
            boundary1=self.boundary2.swapped(),
            boundary2=self.boundary1.swapped(),
            envelope=self.envelope.swapped(),
            domain=self.domain,
            label=self.label + (" (swapped)" if self.label else ""),
        )

    def with_eps(self, eps: float) -> "StructureSpec":
        return replace(self, leading1=Leading(self.leading1.p, eps),
                       leading2=Leading(self.leading2.p, eps))

    # serialization -------------------------------------------------------
    def to_mapping(self) -> dict:
        def terms(t: Terms):
            return {
                "terms": [{f.name: getattr(m, f.name) for f in fields(m)} for m in t.terms],
                "source": t.source.text,
            }

        return {
            "label": self.label,
            "domain": None if self.domain is None else self.domain.to_mapping(),
            "exponents": self.exponents.to_mapping(),
            "leading": [{"p": self.leading1.p, "eps": self.leading1.eps},
                        {"p": self.leading2.p, "eps": self.leading2.eps}],
            "reaction": [terms(self.reaction1), terms(self.reaction2)],
            "boundary": [terms(self.boundary1), terms(self.boundary2)],
            "envelope": self.envelope.to_mapping(),
        }

    @classmethod
    def from_mapping(cls, data) -> "StructureSpec":
        try:
            def terms(d):
                return Terms(tuple(Monomial(**m) for m in d.get("terms", [])),
                             Expression(str(d.get("source", "0"))))

            lead = data["leading"]
            reaction = data.get("reaction", [{}, {}])
            boundary = data.get("boundary", [{}, {}])
            dom = data.get("domain")
            return cls(
                exponents=SystemExponents.from_mapping(data["exponents"]),
                leading1=Leading(**lead[0]),
                leading2=Leading(**lead[1]),
                reaction1=terms(reaction[0]),
                reaction2=terms(reaction[1]),
                boundary1=terms(boundary[0]),
                boundary2=terms(boundary[1]),
                envelope=Envelope(tuple(data.get("envelope", {}).items())),
                domain=None if dom is None else Domain.from_mapping(dom),
                label=data.get("label", ""),
            )
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed structure document: {exc}") from exc


def _norm(v):
    return np.sqrt(np.sum(np.asarray(v, dtype=float) ** 2, axis=-1))


def evaluate(spec: StructureSpec, which: str, x, s=0.0, t=0.0, xi=None, zeta=None,
             normal=None):
    """Value of one coefficient function at a single point.

    ``A1``/``A2`` return the flux vector, the others a float.  Boundary
    coefficients take the outward normal from the domain when not given.
    """
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    dim = spec.dim if spec.dim is not None else len(x)
    if len(x) != dim:
        raise DomainMismatch(f"point {x} has dimension {len(x)}, expected {dim}")
    xi = np.zeros(dim) if xi is None else np.atleast_1d(np.asarray(xi, dtype=float))
    zeta = np.zeros(dim) if zeta is None else np.atleast_1d(np.asarray(zeta, dtype=float))
    if len(xi) != dim or len(zeta) != dim:
        raise DomainMismatch(f"gradient vectors must have dimension {dim}")
    dom = spec.domain
    if dom is not None:
        if which.startswith("C"):
            if not dom.on_boundary(x)[0]:
                raise DomainMismatch(f"{which} needs a boundary point, got {x}")
        elif not dom.contains(x)[0]:
            raise DomainMismatch(f"point {x} lies outside the domain")
    if which == "A1":
        return spec.leading1.flux(xi)
    if which == "A2":
        return spec.leading2.flux(zeta)
    X = x[None, :]
    if which.startswith("B"):
        coeff = spec.reaction1 if which == "B1" else spec.reaction2
        return float(coeff.value(X, s, t, _norm(xi), _norm(zeta))[0])
    if normal is None:
        normal = dom.outward_normal(X)[0] if dom is not None else np.zeros(dim)
    coeff = spec.boundary1 if which == "C1" else spec.boundary2
    return float(coeff.value(X, s, t, 0.0, 0.0, normals=np.asarray(normal)[None, :])[0])


# envelopes -----------------------------------------------------------------


def regularized_flux_constants(p: float, eps: float) -> dict:
    """Constants ``A1, A3, A4, A6`` valid for the regularized power flux.

    For ``p >= 2`` the upper bound uses
    ``(a^2 + eps^2)^m <= max(1, 2^(m-1)) (a^(p-2) + eps^(p-2))`` with
    ``m = (p-2)/2``; for ``p < 2`` coercivity is lost only on ``|xi| < eps``.
    """
    m = (p - 2.0) / 2.0
    if p >= 2:
        c = max(1.0, 2.0 ** (m - 1.0))
        ep = eps ** (p - 2.0) if p > 2 else 0.0
        if p == 2:
            return {"A1": 1.0, "A3": 0.0, "A4": 1.0, "A6": 0.0}
        return {"A1": c * (1.0 + ep), "A3": c * ep, "A4": 1.0, "A6": 0.0}
    return {"A1": 1.0, "A3": 0.0, "A4": 2.0**m, "A6": 2.0**m * eps**p}


@dataclass(frozen=True)
class HypothesisCheck:
    id: str
    max_violation: float
    samples: int
    worst: dict

    @property
    def holds(self) -> bool:
        return self.max_violation <= 0.0


@dataclass(frozen=True)
class EnvelopeReport:
    checks: tuple[HypothesisCheck, ...]
    seed: int
    radius: float

    @property
    def overall(self) -> bool:
        return all(c.holds for c in self.checks)

    def __getitem__(self, hid: str) -> HypothesisCheck:
        for c in self.checks:
            if c.id == hid:
                return c
        raise KeyError(hid)

    def to_mapping(self) -> dict:
        return {
            "seed": self.seed,
            "radius": self.radius,
            "overall": self.overall,
            "checks": [
                {"id": c.id, "max_violation": c.max_violation, "samples": c.samples,
                 "holds": c.holds, "worst": c.worst}
                for c in self.checks
            ],
        }


def _sample_ball(rng, n, dim, radius):
    d = rng.normal(size=(n, dim))
    d /= np.maximum(_norm(d)[:, None], 1e-300)
    return d * rng.uniform(0.0, radius, size=(n, 1))


def _sample_domain(rng, dom: Domain, n):
    b = dom.bounds
    if dom.dim == 1:
        return rng.uniform(b[0], b[1], size=(n, 1))
    return np.column_stack([rng.uniform(b[0], b[1], n), rng.uniform(b[2], b[3], n)])


def _sample_boundary(rng, dom: Domain, n):
    b = dom.bounds
    if dom.dim == 1:
        return np.where(rng.random(n) < 0.5, b[0], b[1])[:, None]
    wx, wy = b[1] - b[0], b[3] - b[2]
    pos = rng.uniform(0.0, 2 * (wx + wy), n)
    out = np.empty((n, 2))
    for i, r in enumerate(pos):
        if r < wx:
            out[i] = (b[0] + r, b[2])
        elif r < wx + wy:
            out[i] = (b[1], b[2] + r - wx)
        elif r < 2 * wx + wy:
            out[i] = (b[1] - (r - wx - wy), b[3])
        else:
            out[i] = (b[0], b[3] - (r - 2 * wx - wy))
    return out


ROUNDING = 1e-12


def _excess(value, bound):
    """``value - bound``, with excesses at rounding level reported as 0."""
    v = np.asarray(value, dtype=float) - np.asarray(bound, dtype=float)
    slack = ROUNDING * (np.abs(value) + np.abs(bound))
    return np.where((v > 0) & (v <= slack), 0.0, v)


def verify_envelope(spec: StructureSpec, samples: int = 1000, radius: float = 10.0,
                    seed: int = 0) -> EnvelopeReport:
    """Sample the growth bounds (H1)-(H8); a violation is the amount by which
    the coefficient exceeds its envelope (or, for (H3)/(H4), undercuts the
    coercivity bound).  Excesses within relative rounding ``ROUNDING`` of
    the bound count as 0."""
    if samples < 1 or radius <= 0:
        raise ValueError("need samples >= 1 and radius > 0")
    rng = np.random.default_rng(seed)
    dom = spec.domain if spec.domain is not None else (unit_interval())
    dim = dom.dim
    n = samples
    X = _sample_domain(rng, dom, n)
    Xb = _sample_boundary(rng, dom, n)
    nb = dom.outward_normal(Xb)
    s = rng.uniform(-radius, radius, n)
    t = rng.uniform(-radius, radius, n)
    xi = _sample_ball(rng, n, dim, radius)
    zeta = _sample_ball(rng, n, dim, radius)
    axi, azeta = _norm(xi), _norm(zeta)
    e, env = spec.exponents, spec.envelope
    p, q = e.p, e.q

    a1, a2 = spec.leading1.flux(xi), spec.leading2.flux(zeta)
    viol = {}
    viol["H1"] = _excess(_norm(a1), env["A1"] * axi ** (p - 1)
                         + env["A2"] * np.abs(s) ** (e.r1 * (p - 1) / p) + env["A3"])
    viol["H2"] = _excess(_norm(a2), env["tA1"] * azeta ** (q - 1)
                         + env["tA2"] * np.abs(t) ** (e.r2 * (q - 1) / q) + env["tA3"])
    viol["H3"] = _excess(env["A4"] * axi**p - env["A5"] * np.abs(s) ** e.r1 - env["A6"],
                         np.sum(a1 * xi, axis=-1))
    viol["H4"] = _excess(env["tA4"] * azeta**q - env["tA5"] * np.abs(t) ** e.r2 - env["tA6"],
                         np.sum(a2 * zeta, axis=-1))
    S, T = np.abs(s), np.abs(t)

    def b_env(pre, b):
        return (env[pre + "1"] * S ** b[0] + env[pre + "2"] * T ** b[1]
                + env[pre + "3"] * S ** b[2] * T ** b[3] + env[pre + "4"] * axi ** b[4]
                + env[pre + "5"] * azeta ** b[5] + env[pre + "6"] * axi ** b[6] * azeta ** b[7]
                + env[pre + "7"])

    def c_env(pre, c):
        return (env[pre + "1"] * S ** c[0] + env[pre + "2"] * T ** c[1]
                + env[pre + "3"] * S ** c[2] * T ** c[3] + env[pre + "4"])

    b = [getattr(e, f"b{i}") for i in range(1, 9)]
    tb = [getattr(e, f"tb{i}") for i in range(1, 9)]
    c = [getattr(e, f"c{i}") for i in range(1, 5)]
    tc = [getattr(e, f"tc{i}") for i in range(1, 5)]
    viol["H5"] = _excess(np.abs(spec.reaction1.value(X, s, t, axi, azeta)), b_env("B", b))
    viol["H6"] = _excess(np.abs(spec.reaction2.value(X, s, t, axi, azeta)), b_env("tB", tb))
    viol["H7"] = _excess(np.abs(spec.boundary1.value(Xb, s, t, 0.0, 0.0, normals=nb)), c_env("C", c))
    viol["H8"] = _excess(np.abs(spec.boundary2.value(Xb, s, t, 0.0, 0.0, normals=nb)), c_env("tC", tc))

    checks = []
    for hid in ("H1", "H2", "H3", "H4", "H5", "H6", "H7", "H8"):
        v = np.asarray(viol[hid], dtype=float)
        k = int(np.argmax(v))
        pts = Xb if hid in ("H7", "H8") else X
        worst = {"x": pts[k].tolist(), "s": float(s[k]), "t": float(t[k]),
                 "xi": xi[k].tolist(), "zeta": zeta[k].tolist()}
        checks.append(HypothesisCheck(hid, float(v[k]), n, worst))
    return EnvelopeReport(tuple(checks), seed, radius)


# manufactured problems -----------------------------------------------------


@dataclass(frozen=True)
class ManufacturedProblem:
    spec: StructureSpec
    exact_u: Expression
    exact_v: Expression


def _sup_on(expr: Expression, dom: Domain, boundary=False, n=201) -> float:
    b = dom.bounds
    if dom.dim == 1:
        pts = np.array([[b[0]], [b[1]]]) if boundary else np.linspace(b[0], b[1], 20 * n)[:, None]
    else:
        xs, ys = np.linspace(b[0], b[1], n), np.linspace(b[2], b[3], n)
        if boundary:
            pts = np.concatenate([
                np.column_stack([xs, np.full(n, b[2])]), np.column_stack([xs, np.full(n, b[3])]),
                np.column_stack([np.full(n, b[0]), ys]), np.column_stack([np.full(n, b[1]), ys]),
            ])
        else:
            X, Y = np.meshgrid(xs, ys)
            pts = np.column_stack([X.ravel(), Y.ravel()])
    normals = dom.outward_normal(pts) if boundary else None
    return float(np.max(np.abs(expr(pts, normals))))


def _auto_envelope(exps: SystemExponents, lead1: Leading, lead2: Leading, coeffs, sups) -> Envelope:
    """Envelope constants that dominate the given catalog terms: a term with a
    smaller exponent than its slot is bounded by ``|s|^b + 1``."""
    env = {}
    for pre, lead in (("A", lead1), ("tA", lead2)):
        for k, v in regularized_flux_constants(lead.p, lead.eps).items():
            env[pre + k[1:]] = v
    names = {"B1": ("B", 7), "B2": ("tB", 7), "C1": ("C", 4), "C2": ("tC", 4)}
    slot_index = {("s",): 1, ("t",): 2, ("s", "t"): 3, ("xi",): 4, ("zeta",): 5, ("xi", "zeta"): 6}
    for (which, terms), sup in zip(coeffs, sups):
        pre, const = names[which]
        slots = _slots(which)
        cval = env.get(f"{pre}{const}", 0.0) + sup
        for m in terms.terms:
            pattern = tuple(k for k in ("s", "t", "xi", "zeta") if getattr(m, k) > 0)
            if not pattern:
                cval += abs(m.coeff)
                continue
            key = f"{pre}{slot_index[pattern]}"
            env[key] = env.get(key, 0.0) + abs(m.coeff)
            keys = slots[pattern]
            if not isinstance(keys, tuple) and getattr(m, pattern[0]) < getattr(exps, keys):
                cval += abs(m.coeff)
        env[f"{pre}{const}"] = cval * 1.01 + 1e-12
    return Envelope(tuple(env.items()))


def _build(label, dom, exps, lead1, lead2, u, v, r1, r2, b1, b2):
    """Sources making ``(u, v)`` an exact solution of the strong form,
    including the flux conditions ``A . nu = C`` on the boundary."""
    dim = dom.dim
    coords = [_X, _Y][:dim]
    nrm = [_NX, _NY][:dim]
    gu = [sp.diff(u, c) for c in coords]
    gv = [sp.diff(v, c) for c in coords]

    def flux(lead, g):
        if lead.p == 2:
            return g
        w = (sum(c**2 for c in g) + sp.nsimplify(lead.eps) ** 2) ** (sp.nsimplify(lead.p - 2) / 2)
        return [w * c for c in g]

    a1, a2 = flux(lead1, gu), flux(lead2, gv)
    nxi = sp.sqrt(sum(c**2 for c in gu))
    nzeta = sp.sqrt(sum(c**2 for c in gv))
    div1 = sum(sp.diff(a, c) for a, c in zip(a1, coords))
    div2 = sum(sp.diff(a, c) for a, c in zip(a2, coords))

    def terms_sym(terms):
        return sum((m.sympy(u, v, nxi, nzeta) for m in terms), sp.Integer(0))

    f1 = -div1 - terms_sym(r1)
    f2 = -div2 - terms_sym(r2)
    g1 = sum(a * n for a, n in zip(a1, nrm)) - terms_sym(b1)
    g2 = sum(a * n for a, n in zip(a2, nrm)) - terms_sym(b2)
    reaction1 = Terms(tuple(r1), Expression.from_sympy(f1))
    reaction2 = Terms(tuple(r2), Expression.from_sympy(f2))
    boundary1 = Terms(tuple(b1), Expression.from_sympy(g1))
    boundary2 = Terms(tuple(b2), Expression.from_sympy(g2))
    sups = [_sup_on(reaction1.source, dom), _sup_on(reaction2.source, dom),
            _sup_on(boundary1.source, dom, True), _sup_on(boundary2.source, dom, True)]
    env = _auto_envelope(exps, lead1, lead2,
                         [("B1", reaction1), ("B2", reaction2), ("C1", boundary1), ("C2", boundary2)],
                         sups)
    spec = StructureSpec(exps, lead1, lead2, reaction1, reaction2, boundary1, boundary2,
                         env, dom, label)
    return ManufacturedProblem(spec, Expression.from_sympy(u), Expression.from_sympy(v))


def _linear_1d(dom):
    x = _X
    exps = SystemExponents(p=2, q=2, N=2, b1=1, b2=1, tb1=1, tb2=1, c1=1, tc1=1, tc2=1,
                           working_exponent_override=8.0)
    u = x * (1 - x)
    v = sp.sin(sp.pi * x)
    return _build(
        "linear-1d", dom, exps, Leading(2.0), Leading(2.0), u, v,
        [Monomial(-1.0, s=1, sign="sign_s"), Monomial(0.5, t=1, sign="sign_t")],
        [Monomial(-1.0, t=1, sign="sign_t"), Monomial(0.3, s=1, sign="sign_s")],
        [Monomial(-0.5, s=1, sign="sign_s")],
        [Monomial(-0.5, t=1, sign="sign_t"), Monomial(0.2, s=1, sign="sign_s")],
    )


def _decoupled(dom):
    x = _X
    exps = SystemExponents(p=2, q=2, N=2, b1=3, tb2=1, tc2=1, working_exponent_override=8.0)
    u = sp.cos(sp.pi * x) + 2
    v = x**2 + 1
    return _build(
        "decoupled", dom, exps, Leading(2.0), Leading(2.0), u, v,
        [Monomial(-1.0, s=3, sign="sign_s"), Monomial(-1.0, s=1, sign="sign_s")],
        [Monomial(-1.0, t=1, sign="sign_t")],
        [],
        [Monomial(-1.0, t=1, sign="sign_t")],
    )


def _plap_2d(dom, eps=1e-3):
    x, y = _X, _Y
    exps = SystemExponents(p=3, q=2, N=2, b1=1, b2=1, tb1=1, tb2=1, tb5=1, c1=1,
                           tc1=1, tc2=1, working_exponent_override=8.0)
    u = sp.exp(-2 * ((x - sp.Rational(2, 5)) ** 2 + (y - sp.Rational(11, 20)) ** 2))
    v = sp.cos(sp.pi * x) + y**2
    return _build(
        "plap-2d", dom, exps, Leading(3.0, eps), Leading(2.0, eps), u, v,
        [Monomial(-1.0, s=1, sign="sign_s"), Monomial(0.5, t=1, sign="sign_t")],
        [Monomial(-1.0, t=1, sign="sign_t"), Monomial(0.5, s=1, sign="sign_s"),
         Monomial(0.1, xi=1, sign="+")],
        [Monomial(-0.5, s=1, sign="sign_s")],
        [Monomial(-0.5, t=1, sign="sign_t"), Monomial(0.25, s=1, sign="sign_s")],
    )


def _dirichlet_1d(dom):
    x = _X
    exps = SystemExponents(p=2, q=2, N=2, b1=1, b2=1, tb1=1, tb2=1, working_exponent_override=8.0)
    lo, hi = (sp.nsimplify(b) for b in dom.bounds)
    u = sp.sin(sp.pi * (x - lo) / (hi - lo))
    v = (x - lo) * (hi - x)
    return _build(
        "dirichlet-1d", dom, exps, Leading(2.0), Leading(2.0), u, v,
        [Monomial(-1.0, s=1, sign="sign_s"), Monomial(0.5, t=1, sign="sign_t")],
        [Monomial(-1.0, t=1, sign="sign_t"), Monomial(0.5, s=1, sign="sign_s")],
        [], [],
    )


PRESETS = {
    "linear-1d": (_linear_1d, 1),
    "decoupled": (_decoupled, 1),
    "plap-2d": (_plap_2d, 2),
    "dirichlet-1d": (_dirichlet_1d, 1),
}


@lru_cache(maxsize=32)
def manufactured(preset: str, mesh_hint: Domain | None = None) -> ManufacturedProblem:
    """Manufactured problem with known exact solution.

    Presets: ``linear-1d``, ``decoupled``, ``plap-2d`` (flux boundary
    conditions) and ``dirichlet-1d`` (solution vanishing on the boundary).
    ``mesh_hint`` selects the domain; defaults are the unit interval/square.
    """
    if preset not in PRESETS:
        raise UnknownPreset(f"unknown preset {preset!r}; known: {sorted(PRESETS)}")
    builder, dim = PRESETS[preset]
    dom = mesh_hint if mesh_hint is not None else (unit_interval() if dim == 1 else unit_square())
    if dom.dim != dim:
        raise DomainMismatch(f"preset {preset!r} is {dim}D, got a {dom.dim}D domain")
    return builder(dom)
