"""P1 finite element residuals and an alternating Newton solver for the
coupled system, with flux (nonlinear Neumann) or homogeneous Dirichlet
boundary conditions."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from . import kernels
from .errors import MeshMismatch, SingularJacobian
from .mesh import Field, Mesh, check_same_mesh
from .structure import StructureSpec

log = logging.getLogger(__name__)

MODES = ("flux-boundary", "dirichlet")


@dataclass(frozen=True)
class SolveConfig:
    epsilon: float | None = None  # None keeps the regularization of the spec
    newton_tol: float = 1e-10
    newton_max: int = 50
    damping: float = 0.5
    picard_max: int = 200
    picard_tol: float = 1e-10
    mode: str = "flux-boundary"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.newton_tol <= 0 or self.picard_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.newton_max < 1 or self.picard_max < 1:
            raise ValueError("iteration caps must be at least 1")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass(frozen=True, eq=False)
class SolutionPair:
    u: Field
    v: Field
    residual_u: float
    residual_v: float
    outer_iterations: int
    converged: bool
    change: float = float("nan")

    @property
    def mesh(self) -> Mesh:
        return self.u.mesh


def _effective_spec(spec: StructureSpec, config: SolveConfig) -> StructureSpec:
    if config.epsilon is not None:
        spec = spec.with_eps(config.epsilon)
    for lead in (spec.leading1, spec.leading2):
        if lead.p != 2 and lead.eps <= 0:
            raise ValueError(f"p = {lead.p} needs a positive regularization epsilon")
    return spec


def _check_domain(mesh: Mesh, spec: StructureSpec):
    if spec.domain is not None and spec.domain != mesh.domain:
        raise MeshMismatch(f"spec domain {spec.domain} differs from mesh domain {mesh.domain}")


def _scatter(mesh_idx: np.ndarray, local: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(mesh_idx.ravel(), weights=local.ravel(), minlength=n)


def _scatter_matrix(idx: np.ndarray, local: np.ndarray, n: int):
    k = idx.shape[1]
    rows = np.repeat(idx, k, axis=1).ravel()
    cols = np.tile(idx, (1, k)).ravel()
    return sps.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _system(mesh: Mesh, spec: StructureSpec, u: np.ndarray, v: np.ndarray, which: str,
            mode: str, frozen=None, jacobian=True):
    """Residual (and Jacobian in the equation's own unknown).

    ``frozen`` optionally supplies element gradients ``(grad_u, grad_v)`` at
    which gradient-dependent reactions are evaluated.
    """
    first = which == "first"
    own = u if first else v
    lead = spec.leading1 if first else spec.leading2
    reaction = spec.reaction1 if first else spec.reaction2
    boundary = spec.boundary1 if first else spec.boundary2
    wrt = "s" if first else "t"
    n = mesh.n_vertices
    E = mesh.elements

    res_loc, jac_loc = kernels.flux_local(mesh.shape_gradients, mesh.element_measures,
                                          own[E], lead.p, lead.eps)
    if frozen is None:
        gu, gv = mesh.element_gradients(u), mesh.element_gradients(v)
    else:
        gu, gv = frozen
    nq = mesh.quad_bary.shape[0]
    axi = np.repeat(np.linalg.norm(gu, axis=1)[:, None], nq, axis=1)
    azeta = np.repeat(np.linalg.norm(gv, axis=1)[:, None], nq, axis=1)
    uq, vq = mesh.interpolate(u), mesh.interpolate(v)
    W = mesh.quad_W
    phi = mesh.quad_bary

    bval = reaction.value(mesh.quad_points, uq, vq, axi, azeta)
    res_loc = res_loc - (W * bval) @ phi
    R = _scatter(E, res_loc, n)
    if jacobian:
        db = reaction.derivative(uq, vq, axi, azeta, wrt)
        jac_loc = jac_loc - kernels.mass_local(W * db, phi)
        J = _scatter_matrix(E, jac_loc, n)

    if mode == "flux-boundary":
        F = mesh.boundary_facets
        ub, vb = mesh.interpolate_facets(u), mesh.interpolate_facets(v)
        nbq = np.repeat(mesh.facet_normals[:, None, :], mesh.facet_bary.shape[0], axis=1)
        cval = boundary.value(mesh.facet_points, ub, vb, 0.0, 0.0, normals=nbq)
        Wb = mesh.facet_W
        R = R - _scatter(F, (Wb * cval) @ mesh.facet_bary, n)
        if jacobian:
            dc = boundary.derivative(ub, vb, 0.0, 0.0, wrt)
            J = J - _scatter_matrix(F, kernels.mass_local(Wb * dc, mesh.facet_bary), n)
    else:
        bv = mesh.boundary_vertices
        R[bv] = own[bv]
        if jacobian:
            J = J.tolil()
            J[bv, :] = 0.0
            J[bv, bv] = 1.0
            J = J.tocsr()
    return (R, J) if jacobian else R


def assemble_residual(mesh: Mesh, spec: StructureSpec, u: Field, v: Field,
                      config: SolveConfig = SolveConfig(), which: str = "first") -> np.ndarray:
    """Nodal residual ``int A.grad(phi_i) - int B phi_i - int_bdry C phi_i`` of
    one equation; in Dirichlet mode boundary rows hold ``u_i``."""
    if which not in ("first", "second"):
        raise ValueError("which must be 'first' or 'second'")
    check_same_mesh(u, v)
    if not mesh.same_as(u.mesh):
        raise MeshMismatch("fields are not defined on the given mesh")
    _check_domain(mesh, spec)
    spec = _effective_spec(spec, config)
    return _system(mesh, spec, u.values, v.values, which, config.mode, jacobian=False)


def _lu_solve(J, rhs):
    try:
        lu = spla.splu(J.tocsc())
    except RuntimeError as exc:
        raise SingularJacobian(str(exc)) from exc
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularJacobian("Newton step is not finite")
    return x


def solve_equation(mesh: Mesh, spec: StructureSpec, config: SolveConfig, which: str,
                   u: np.ndarray, v: np.ndarray, frozen=None, tol=None, min_steps=0):
    """Damped Newton on one equation with the other unknown held fixed.

    ``min_steps`` forces that many Newton updates even when the residual is
    already below ``tol``; the outer loop uses one so that a sweep never
    stalls on an iterate that is only accurate to the residual tolerance.
    Returns ``(values, residual_norm, iterations, converged)``.
    """
    tol = config.newton_tol if tol is None else tol
    first = which == "first"
    x = (u if first else v).copy()

    def pack(xv):
        return (xv, v) if first else (u, xv)

    R, J = _system(mesh, spec, *pack(x), which, config.mode, frozen)
    norm = float(np.max(np.abs(R)))
    for it in range(1, config.newton_max + 1):
        if norm <= tol and it > min_steps:
            return x, norm, it - 1, True
        step = _lu_solve(J, -R)
        if config.mode == "dirichlet":
            bv = mesh.boundary_vertices
            step[bv] = -R[bv]  # exact constraint rows, no factorization rounding
        lam = 1.0
        best = None
        while lam > 1e-10:
            trial = x + lam * step
            Rt = _system(mesh, spec, *pack(trial), which, config.mode, frozen, jacobian=False)
            nt = float(np.max(np.abs(Rt)))
            if best is None or nt < best[1]:
                best = (trial, nt)
            if nt <= (1.0 - 1e-4 * lam) * norm or nt <= tol:
                break
            lam *= config.damping
        x, norm = best
        R, J = _system(mesh, spec, *pack(x), which, config.mode, frozen)
        norm = float(np.max(np.abs(R)))
    return x, norm, config.newton_max, norm <= tol


def solve(mesh: Mesh, spec: StructureSpec, config: SolveConfig = SolveConfig(),
          initial: SolutionPair | None = None) -> SolutionPair:
    """Alternating (Picard) sweeps over the two equations, each solved by
    damped Newton; own-gradient reaction terms use the previous sweep's
    gradients.  Returns the last iterate, flagged ``converged=False`` when the
    caps run out."""
    _check_domain(mesh, spec)
    spec = _effective_spec(spec, config)
    if initial is not None:
        if not mesh.same_as(initial.mesh):
            raise MeshMismatch("initial guess lives on a different mesh")
        u, v = initial.u.values.copy(), initial.v.values.copy()
    else:
        u = np.zeros(mesh.n_vertices)
        v = np.zeros(mesh.n_vertices)
    inner_tol = 0.1 * config.newton_tol
    change = np.inf
    ru = rv = np.inf
    it = 0
    for it in range(1, config.picard_max + 1):
        gu_prev, gv_prev = mesh.element_gradients(u), mesh.element_gradients(v)
        u_new, *_ = solve_equation(mesh, spec, config, "first", u, v,
                                   frozen=(gu_prev, gv_prev), tol=inner_tol, min_steps=1)
        v_new, *_ = solve_equation(mesh, spec, config, "second", u_new, v,
                                   frozen=(mesh.element_gradients(u_new), gv_prev), tol=inner_tol,
                                   min_steps=1)
        change = float(max(np.max(np.abs(u_new - u)), np.max(np.abs(v_new - v))))
        u, v = u_new, v_new
        ru = float(np.max(np.abs(_system(mesh, spec, u, v, "first", config.mode, jacobian=False))))
        rv = float(np.max(np.abs(_system(mesh, spec, u, v, "second", config.mode, jacobian=False))))
        log.debug("sweep %d: change %.3e, residuals %.3e %.3e", it, change, ru, rv)
        if not np.isfinite(change):
            break
        if change <= config.picard_tol and max(ru, rv) <= config.newton_tol:
            return SolutionPair(Field(mesh, u), Field(mesh, v), ru, rv, it, True, change)
    log.warning("alternating solve stopped after %d sweeps (change %.3e, residuals %.3e, %.3e)",
                it, change, ru, rv)
    return SolutionPair(Field(mesh, u), Field(mesh, v), ru, rv, it, False, change)


def l2_error(field: Field, exact) -> float:
    """L2 distance between a P1 field and a closed-form function, integrated
    with the mesh's higher-degree rule."""
    mesh = field.mesh
    pts, W, bary = mesh.high_order_rule()
    uh = field.values[mesh.elements] @ bary.T
    diff = uh - exact(pts)
    return float(np.sqrt(np.sum(W * diff**2)))


def nodal_error(field: Field, exact) -> float:
    return float(np.max(np.abs(field.values - exact(field.mesh.vertices))))


__all__ = [
    "SolveConfig", "SolutionPair", "assemble_residual", "solve", "solve_equation",
    "l2_error", "nodal_error",
]
