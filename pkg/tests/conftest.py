import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from moserlab.mesh import build_mesh  # noqa: E402
from moserlab.solver import SolveConfig, solve  # noqa: E402
from moserlab.structure import manufactured  # noqa: E402

PRESET_MESH = {"linear-1d": 64, "decoupled": 64, "dirichlet-1d": 64, "plap-2d": 16}
PRESET_MODE = {"dirichlet-1d": "dirichlet"}


def solve_preset(name, n=None):
    prob = manufactured(name)
    mesh = build_mesh(prob.spec.domain, n or PRESET_MESH[name])
    config = SolveConfig(mode=PRESET_MODE.get(name, "flux-boundary"))
    return prob, solve(mesh, prob.spec, config)


_CACHE = {}


@pytest.fixture(scope="session")
def solved():
    """Solved presets on their default meshes, computed once."""
    def get(name):
        if name not in _CACHE:
            _CACHE[name] = solve_preset(name)
        return _CACHE[name]
    return get


WORKED = dict(p=2, q=2, N=3, b2=3, b3=1, b4=1, b6=1, b7=0.5, b8=0.5, c2=1, c3=0.5, c4=0.5)


_ACCEPTANCE = {}


def record_acceptance(number, ok, detail):
    _ACCEPTANCE[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
