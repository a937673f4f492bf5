"""Structured simplicial meshes of intervals and rectangles, nodal fields,
quadrature rules and boundary traces."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import MeshMismatch

# Reference rules in barycentric coordinates; weights are fractions of the
# element measure.  The working rule includes the vertices so that
# quadrature values never exceed the nodal extrema and large-exponent norms
# tend to the nodal maximum.
_SIMPSON_BARY = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]])
_SIMPSON_W = np.array([1.0, 4.0, 1.0]) / 6.0

_TRI7_BARY = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
        [1 / 3, 1 / 3, 1 / 3],
    ]
)
_TRI7_W = np.array([3, 3, 3, 8, 8, 8, 27]) / 60.0


def _gauss_interval(n):
    x, w = np.polynomial.legendre.leggauss(n)
    lam = 0.5 * (1.0 + x)
    return np.column_stack([1.0 - lam, lam]), 0.5 * w


def _dunavant5():
    r15 = np.sqrt(15.0)
    a1, a2 = (6 - r15) / 21, (6 + r15) / 21
    w1, w2 = (155 - r15) / 1200, (155 + r15) / 1200
    pts = [[1 / 3, 1 / 3, 1 / 3]]
    wts = [9 / 40]
    for a, w in ((a1, w1), (a2, w2)):
        b = 1 - 2 * a
        pts += [[a, a, b], [a, b, a], [b, a, a]]
        wts += [w, w, w]
    return np.array(pts), np.array(wts)


@dataclass(frozen=True)
class Domain:
    """An interval ``(a, b)`` or an axis-aligned rectangle
    ``(x0, x1) x (y0, y1)``."""

    kind: str
    bounds: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("interval", "rectangle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        want = 2 if self.kind == "interval" else 4
        if len(self.bounds) != want:
            raise ValueError(f"{self.kind} needs {want} bounds, got {self.bounds}")
        b = self.bounds
        if not (b[0] < b[1] and (self.kind == "interval" or b[2] < b[3])):
            raise ValueError(f"degenerate domain bounds {b}")
        object.__setattr__(self, "bounds", tuple(float(v) for v in b))

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def measure(self) -> float:
        b = self.bounds
        if self.dim == 1:
            return b[1] - b[0]
        return (b[1] - b[0]) * (b[3] - b[2])

    @property
    def boundary_measure(self) -> float:
        b = self.bounds
        if self.dim == 1:
            return 2.0
        return 2.0 * ((b[1] - b[0]) + (b[3] - b[2]))

    def contains(self, x, tol=1e-12) -> np.ndarray:
        x = np.atleast_2d(x)
        b = self.bounds
        ok = (x[:, 0] >= b[0] - tol) & (x[:, 0] <= b[1] + tol)
        if self.dim == 2:
            ok &= (x[:, 1] >= b[2] - tol) & (x[:, 1] <= b[3] + tol)
        return ok

    def on_boundary(self, x, tol=1e-9) -> np.ndarray:
        x = np.atleast_2d(x)
        b = self.bounds
        near = np.isclose(x[:, 0], b[0], atol=tol) | np.isclose(x[:, 0], b[1], atol=tol)
        if self.dim == 2:
            near |= np.isclose(x[:, 1], b[2], atol=tol) | np.isclose(x[:, 1], b[3], atol=tol)
        return near & self.contains(x, tol)

    def outward_normal(self, x, tol=1e-9) -> np.ndarray:
        """Outward unit normals at boundary points (corners take the first
        matching side)."""
        x = np.atleast_2d(x)
        b = self.bounds
        n = np.zeros_like(x, dtype=float)
        done = np.zeros(len(x), dtype=bool)
        sides = [(0, b[0], -1.0), (0, b[1], 1.0)]
        if self.dim == 2:
            sides += [(1, b[2], -1.0), (1, b[3], 1.0)]
        for axis, value, sign in sides:
            hit = ~done & np.isclose(x[:, axis], value, atol=tol)
            n[hit, axis] = sign
            done |= hit
        return n

    def to_mapping(self) -> dict:
        return {"kind": self.kind, "bounds": list(self.bounds)}

    @classmethod
    def from_mapping(cls, data) -> "Domain":
        return cls(data["kind"], tuple(data["bounds"]))


def unit_interval() -> Domain:
    return Domain("interval", (0.0, 1.0))


def unit_square() -> Domain:
    return Domain("rectangle", (0.0, 1.0, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class Mesh:
    domain: Domain
    divisions: tuple[int, ...]
    vertices: np.ndarray
    elements: np.ndarray
    boundary_facets: np.ndarray
    facet_normals: np.ndarray
    facet_measures: np.ndarray
    quad_bary: np.ndarray = field(repr=False)
    quad_weights: np.ndarray = field(repr=False)
    facet_bary: np.ndarray = field(repr=False)
    facet_weights: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def h(self) -> float:
        b = self.domain.bounds
        return max((b[2 * i + 1] - b[2 * i]) / n for i, n in enumerate(self.divisions))

    def same_as(self, other: "Mesh") -> bool:
        return self is other or (
            self.domain == other.domain and self.divisions == other.divisions
        )

    @cached_property
    def element_measures(self) -> np.ndarray:
        X = self.vertices[self.elements]
        if self.dim == 1:
            return np.abs(X[:, 1, 0] - X[:, 0, 0])
        e1 = X[:, 1] - X[:, 0]
        e2 = X[:, 2] - X[:, 0]
        return 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def shape_gradients(self) -> np.ndarray:
        """Constant gradients of the P1 basis, shape ``(ne, d+1, d)``."""
        X = self.vertices[self.elements]
        if self.dim == 1:
            L = X[:, 1, 0] - X[:, 0, 0]
            G = np.empty((len(X), 2, 1))
            G[:, 0, 0] = -1.0 / L
            G[:, 1, 0] = 1.0 / L
            return G
        J = np.stack([X[:, 1] - X[:, 0], X[:, 2] - X[:, 0]], axis=2)  # (ne, 2, 2)
        Jinv_T = np.linalg.inv(J).transpose(0, 2, 1)
        ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        return np.einsum("ij,ekj->eik", ref, Jinv_T)

    @cached_property
    def quad_points(self) -> np.ndarray:
        """Physical quadrature points, shape ``(ne, nq, d)``."""
        return np.einsum("qa,ead->eqd", self.quad_bary, self.vertices[self.elements])

    @cached_property
    def quad_W(self) -> np.ndarray:
        """Physical quadrature weights, shape ``(ne, nq)``."""
        return self.element_measures[:, None] * self.quad_weights[None, :]

    @cached_property
    def facet_points(self) -> np.ndarray:
        return np.einsum("qa,fad->fqd", self.facet_bary, self.vertices[self.boundary_facets])

    @cached_property
    def facet_W(self) -> np.ndarray:
        return self.facet_measures[:, None] * self.facet_weights[None, :]

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_facets)

    def interpolate(self, values: np.ndarray) -> np.ndarray:
        """Values of the P1 interpolant at the quadrature points ``(ne, nq)``."""
        return values[self.elements] @ self.quad_bary.T

    def interpolate_facets(self, values: np.ndarray) -> np.ndarray:
        return values[self.boundary_facets] @ self.facet_bary.T

    def element_gradients(self, values: np.ndarray) -> np.ndarray:
        """Gradient of the P1 interpolant on each element ``(ne, d)``."""
        return np.einsum("ek,ekd->ed", values[self.elements], self.shape_gradients)

    def high_order_rule(self):
        """A higher-degree rule ``(points (ne, nq, d), weights (ne, nq), bary)``
        for error integrals."""
        if self.dim == 1:
            bary, w = _gauss_interval(5)
        else:
            bary, w = _dunavant5()
        pts = np.einsum("qa,ead->eqd", bary, self.vertices[self.elements])
        return pts, self.element_measures[:, None] * w[None, :], bary


def build_mesh(domain: Domain, divisions) -> Mesh:
    """Uniform mesh; ``divisions`` is an int or one count per axis."""
    if np.isscalar(divisions):
        divisions = (int(divisions),) * domain.dim
    divisions = tuple(int(n) for n in divisions)
    if len(divisions) != domain.dim or min(divisions) < 1:
        raise ValueError(f"bad divisions {divisions} for a {domain.dim}D domain")
    b = domain.bounds
    if domain.dim == 1:
        (n,) = divisions
        x = np.linspace(b[0], b[1], n + 1)
        vertices = x[:, None]
        elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
        facets = np.array([[0], [n]])
        normals = np.array([[-1.0], [1.0]])
        measures = np.ones(2)
        return Mesh(domain, divisions, vertices, elements, facets, normals, measures,
                    _SIMPSON_BARY, _SIMPSON_W, np.ones((1, 1)), np.ones(1))

    nx, ny = divisions
    xs = np.linspace(b[0], b[1], nx + 1)
    ys = np.linspace(b[2], b[3], ny + 1)
    X, Y = np.meshgrid(xs, ys)  # row j is y_j
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i + j * (nx + 1)

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    v00, v10, v11, v01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
    elements = np.concatenate(
        [np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])]
    )
    ii = np.arange(nx)
    jj = np.arange(ny)
    facets = np.concatenate([
        np.column_stack([vid(ii, 0), vid(ii + 1, 0)]),
        np.column_stack([vid(nx, jj), vid(nx, jj + 1)]),
        np.column_stack([vid(ii + 1, ny), vid(ii, ny)]),
        np.column_stack([vid(0, jj + 1), vid(0, jj)]),
    ])
    normals = np.concatenate([
        np.tile([0.0, -1.0], (nx, 1)),
        np.tile([1.0, 0.0], (ny, 1)),
        np.tile([0.0, 1.0], (nx, 1)),
        np.tile([-1.0, 0.0], (ny, 1)),
    ])
    d = vertices[facets[:, 1]] - vertices[facets[:, 0]]
    measures = np.hypot(d[:, 0], d[:, 1])
    return Mesh(domain, divisions, vertices, elements, facets, normals, measures,
                _TRI7_BARY, _TRI7_W, _SIMPSON_BARY, _SIMPSON_W)


@dataclass(frozen=True, eq=False)
class Field:
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mesh.n_vertices,):
            raise ValueError(
                f"field has {values.shape} values for {self.mesh.n_vertices} vertices"
            )
        object.__setattr__(self, "values", values)

    def with_values(self, values) -> "Field":
        return Field(self.mesh, values)

    @property
    def max(self) -> float:
        return float(np.max(self.values))

    @property
    def abs_max(self) -> float:
        return float(np.max(np.abs(self.values)))


def check_same_mesh(*fields: Field) -> Mesh:
    mesh = fields[0].mesh
    for f in fields[1:]:
        if not mesh.same_as(f.mesh):
            raise MeshMismatch("fields are defined on different meshes")
    return mesh


@dataclass(frozen=True, eq=False)
class BoundaryField:
    """Restriction of a nodal field to the boundary vertices.

    ``facets`` index into ``vertex_ids``/``values``; each facet carries its
    surface measure (unit point measure in 1D).
    """

    vertex_ids: np.ndarray
    values: np.ndarray
    facets: np.ndarray
    facet_measures: np.ndarray

    @property
    def measure(self) -> float:
        return float(self.facet_measures.sum())


def trace_restrict(u: Field) -> BoundaryField:
    mesh = u.mesh
    ids = mesh.boundary_vertices
    local = np.searchsorted(ids, mesh.boundary_facets)
    return BoundaryField(ids, u.values[ids].copy(), local, mesh.facet_measures.copy())
