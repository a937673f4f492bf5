import numpy as np
import pytest

from conftest import solve_preset
from oracles import linear_1d_monolithic
from moserlab.errors import MeshMismatch, SingularJacobian
from moserlab.hypotheses import SystemExponents
from moserlab.mesh import Domain, Field, build_mesh, unit_interval
from moserlab.solver import SolveConfig, assemble_residual, l2_error, solve, solve_equation
from moserlab.structure import Expression, Leading, Monomial, StructureSpec, Terms, manufactured


def interp(mesh, expr):
    return Field(mesh, expr(mesh.vertices))


def test_config_validation():
    for bad in (dict(newton_tol=0), dict(picard_max=0), dict(damping=1.0), dict(mode="robin"),
                dict(epsilon=-1)):
        with pytest.raises(ValueError):
            SolveConfig(**bad)


def test_exact_interpolant_residual_shrinks():
    prob = manufactured("linear-1d")
    norms = []
    for n in (16, 32, 64):
        mesh = build_mesh(prob.spec.domain, n)
        u, v = interp(mesh, prob.exact_u), interp(mesh, prob.exact_v)
        norms.append(max(np.abs(assemble_residual(mesh, prob.spec, u, v, which=w)).max()
                         for w in ("first", "second")))
    assert norms[1] < norms[0] and norms[2] < norms[1]
    assert norms[2] <= 64 ** -1


def test_zero_problem_zero_residual():
    e = SystemExponents(p=2, q=2, N=2, working_exponent_override=8.0)
    spec = StructureSpec(e, Leading(2.0), Leading(2.0), domain=unit_interval())
    mesh = build_mesh(spec.domain, 8)
    z = Field(mesh, np.zeros(mesh.n_vertices))
    assert np.all(assemble_residual(mesh, spec, z, z) == 0)


def test_decoupled_residual_ignores_other_unknown():
    prob = manufactured("decoupled")
    mesh = build_mesh(prob.spec.domain, 12)
    u = interp(mesh, prob.exact_u)
    rng = np.random.default_rng(0)
    r1 = assemble_residual(mesh, prob.spec, u, Field(mesh, rng.normal(size=mesh.n_vertices)))
    r2 = assemble_residual(mesh, prob.spec, u, Field(mesh, rng.normal(size=mesh.n_vertices)))
    assert np.array_equal(r1, r2)


def test_dirichlet_rows_hold_constraint():
    prob = manufactured("dirichlet-1d")
    mesh = build_mesh(prob.spec.domain, 10)
    u = Field(mesh, np.linspace(3, 4, mesh.n_vertices))
    r = assemble_residual(mesh, prob.spec, u, u, SolveConfig(mode="dirichlet"))
    assert r[0] == 3 and r[-1] == 4


def test_mesh_mismatch():
    prob = manufactured("linear-1d")
    m1, m2 = build_mesh(prob.spec.domain, 4), build_mesh(prob.spec.domain, 5)
    with pytest.raises(MeshMismatch):
        assemble_residual(m1, prob.spec, Field(m1, np.zeros(5)), Field(m2, np.zeros(6)))
    with pytest.raises(MeshMismatch):
        solve(build_mesh(Domain("interval", (0.0, 2.0)), 4), prob.spec)


def test_nonquadratic_flux_needs_epsilon():
    prob = manufactured("plap-2d")
    mesh = build_mesh(prob.spec.domain, 4)
    with pytest.raises(ValueError):
        solve(mesh, prob.spec, SolveConfig(epsilon=0.0))


def test_linear_matches_monolithic_oracle():
    for n in (16, 64, 128):
        _, pair = solve_preset("linear-1d", n)
        _, u, v = linear_1d_monolithic(n)
        assert pair.converged
        assert np.max(np.abs(pair.u.values - u)) <= 1e-10
        assert np.max(np.abs(pair.v.values - v)) <= 1e-10


@pytest.mark.parametrize("name", ["linear-1d", "decoupled", "dirichlet-1d", "plap-2d"])
def test_galerkin_orthogonality(name, solved):
    prob, pair = solved(name)
    assert pair.converged
    mode = "dirichlet" if name == "dirichlet-1d" else "flux-boundary"
    cfg = SolveConfig(mode=mode)
    for which in ("first", "second"):
        r = assemble_residual(pair.mesh, prob.spec, pair.u, pair.v, cfg, which)
        assert np.max(np.abs(r)) <= cfg.newton_tol
    assert max(pair.residual_u, pair.residual_v) <= cfg.newton_tol


def test_dirichlet_solution_vanishes_on_boundary(solved):
    _, pair = solved("dirichlet-1d")
    bv = pair.mesh.boundary_vertices
    assert np.all(pair.u.values[bv] == 0) and np.all(pair.v.values[bv] == 0)


def test_decoupled_equals_single_solves(solved):
    prob, pair = solved("decoupled")
    mesh = pair.mesh
    cfg = SolveConfig()
    z = np.zeros(mesh.n_vertices)
    u_alone, *_ = solve_equation(mesh, prob.spec, cfg, "first", z, np.full(mesh.n_vertices, 7.0),
                                 tol=1e-12)
    v_alone, *_ = solve_equation(mesh, prob.spec, cfg, "second", np.full(mesh.n_vertices, -3.0), z,
                                 tol=1e-12)
    assert np.max(np.abs(u_alone - pair.u.values)) <= 1e-10
    assert np.max(np.abs(v_alone - pair.v.values)) <= 1e-10


def _symmetric_spec():
    e = SystemExponents(p=2, q=2, N=2, b1=1, b2=1, tb1=1, tb2=1, b5=1, tb6=1, c1=1, c2=1, tc1=1, tc2=1,
                        working_exponent_override=8.0)
    src = Expression("1 + x")
    react = Terms((Monomial(-1.0, s=1, sign="sign_s"), Monomial(0.4, t=1, sign="sign_t")), src)
    bdry = Terms((Monomial(-0.5, s=1, sign="sign_s"), Monomial(0.2, t=1, sign="sign_t")),
                 Expression("0.3"))
    return StructureSpec(e, Leading(2.0), Leading(2.0), react, react.swapped(), bdry, bdry.swapped(),
                         domain=unit_interval())


def test_swap_symmetry_symmetric_spec():
    spec = _symmetric_spec()
    mesh = build_mesh(spec.domain, 32)
    a = solve(mesh, spec)
    b = solve(mesh, spec.swapped())
    assert a.converged and b.converged
    assert np.max(np.abs(a.u.values - b.v.values)) <= 1e-10
    assert np.max(np.abs(a.v.values - b.u.values)) <= 1e-10


def test_swap_returns_swapped_solution_general():
    prob = manufactured("plap-2d")
    mesh = build_mesh(prob.spec.domain, 8)
    cfg = SolveConfig(picard_tol=1e-12, newton_tol=1e-12)
    a = solve(mesh, prob.spec, cfg)
    b = solve(mesh, prob.spec.swapped(), cfg)
    assert np.max(np.abs(a.u.values - b.v.values)) <= 1e-10
    assert np.max(np.abs(a.v.values - b.u.values)) <= 1e-10


def test_caps_return_unconverged():
    prob = manufactured("linear-1d")
    mesh = build_mesh(prob.spec.domain, 16)
    pair = solve(mesh, prob.spec, SolveConfig(picard_max=1))
    assert not pair.converged and pair.outer_iterations == 1


def test_singular_jacobian():
    e = SystemExponents(p=2, q=2, N=2, working_exponent_override=8.0)
    spec = StructureSpec(e, Leading(2.0), Leading(2.0),
                         reaction1=Terms((), Expression("1")), domain=unit_interval())
    with pytest.raises(SingularJacobian):
        solve(build_mesh(spec.domain, 8), spec)


def test_initial_guess_reuse():
    prob = manufactured("linear-1d")
    mesh = build_mesh(prob.spec.domain, 16)
    first = solve(mesh, prob.spec)
    again = solve(mesh, prob.spec, initial=first)
    assert again.outer_iterations <= 2
    assert np.max(np.abs(again.u.values - first.u.values)) <= 1e-10


def test_linear_rate_quick():
    prob = manufactured("linear-1d")
    errs = [l2_error(solve_preset("linear-1d", n)[1].u, prob.exact_u) for n in (16, 32, 64)]
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(rates >= 1.9)
