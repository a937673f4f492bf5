import os
import subprocess
import sys

import numpy as np
import pytest

from moserlab import _kernels_py, kernels
from moserlab.mesh import build_mesh, unit_interval, unit_square

compiled = pytest.importorskip("moserlab._kernels")


@pytest.mark.parametrize("r", [1.0, 2.0, 3.7, 100.0, 1e6])
def test_power_sum_parity(r):
    rng = np.random.default_rng(1)
    vals = rng.normal(size=500) * 10
    w = rng.random(500)
    a = compiled.power_sum(vals, w, r)
    b = _kernels_py.power_sum(vals, w, r)
    assert a[0] == b[0]
    assert a[1] == pytest.approx(b[1], rel=1e-13, abs=1e-300)


def test_power_sum_zero_and_empty():
    for impl in (compiled, _kernels_py):
        assert tuple(impl.power_sum(np.zeros(4), np.ones(4), 2.0)) == (0.0, 0.0)
        assert tuple(impl.power_sum(np.zeros(0), np.zeros(0), 2.0)) == (0.0, 0.0)


@pytest.mark.parametrize("mesh", [build_mesh(unit_interval(), 7), build_mesh(unit_square(), 5)])
@pytest.mark.parametrize("p,eps", [(2.0, 0.0), (3.0, 1e-3), (1.5, 1e-2), (4.0, 0.0)])
def test_flux_local_parity(mesh, p, eps):
    rng = np.random.default_rng(2)
    u = rng.normal(size=mesh.n_vertices)
    args = (mesh.shape_gradients, mesh.element_measures, u[mesh.elements], p, eps)
    ra, ja = compiled.flux_local(*args)
    rb, jb = _kernels_py.flux_local(*args)
    np.testing.assert_allclose(ra, rb, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(ja, jb, rtol=1e-12, atol=1e-14)


def test_mass_local_parity():
    mesh = build_mesh(unit_square(), 4)
    rng = np.random.default_rng(3)
    wc = rng.random(mesh.quad_W.shape)
    np.testing.assert_allclose(compiled.mass_local(wc, mesh.quad_bary),
                               _kernels_py.mass_local(wc, mesh.quad_bary), rtol=1e-13)


def test_default_backend_is_compiled():
    if os.environ.get("MOSERLAB_PURE_PYTHON"):
        pytest.skip("fallback forced by environment")
    assert kernels.BACKEND == "cython"


def test_environment_forces_fallback():
    env = dict(os.environ, MOSERLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import moserlab.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
