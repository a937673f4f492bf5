"""Compare the compiled kernels against the numpy fallback.

Times each hot kernel on representative mesh sizes, then a full plap-2d solve
with each backend swapped in.  Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--n 48]
"""
import argparse
import timeit

import numpy as np

from moserlab import _kernels_py, kernels
from moserlab.mesh import build_mesh
from moserlab.solver import SolveConfig, solve
from moserlab.structure import manufactured

try:
    from moserlab import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(n):
    mesh = build_mesh(manufactured("plap-2d").spec.domain, n)
    rng = np.random.default_rng(0)
    u = rng.normal(size=mesh.n_vertices)
    quad = mesh.interpolate(np.abs(u))
    wc = rng.random(mesh.quad_W.shape)
    return {
        "power_sum r=50": lambda k: k.power_sum(quad.ravel(), mesh.quad_W.ravel(), 50.0),
        "flux_local p=3": lambda k: k.flux_local(mesh.shape_gradients, mesh.element_measures,
                                                 u[mesh.elements], 3.0, 1e-3),
        "mass_local": lambda k: k.mass_local(wc, mesh.quad_bary),
    }


def solve_with(impl, n):
    saved = kernels.power_sum, kernels.flux_local, kernels.mass_local
    kernels.power_sum, kernels.flux_local, kernels.mass_local = (
        impl.power_sum, impl.flux_local, impl.mass_local)
    try:
        prob = manufactured("plap-2d")
        return solve(build_mesh(prob.spec.domain, n), prob.spec, SolveConfig())
    finally:
        kernels.power_sum, kernels.flux_local, kernels.mass_local = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=48, help="subdivisions per axis")
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled extension not available; only the fallback can be timed")
    impls = [("python", _kernels_py)] + ([("cython", _compiled)] if _compiled else [])

    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name, _ in impls) + f"{'speedup':>10}")
    for label, fn in kernel_cases(args.n).items():
        times = [best(lambda: fn(k), args.repeat) for _, k in impls]
        ratio = times[0] / times[-1] if len(times) > 1 else float("nan")
        print(f"{label:<18}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times) + f"{ratio:>9.2f}x")

    times, pairs = [], []
    for _, impl in impls:
        pairs.append(solve_with(impl, args.n))
        times.append(best(lambda: solve_with(impl, args.n), 1))
    ratio = times[0] / times[-1] if len(times) > 1 else float("nan")
    print(f"{'plap-2d solve':<18}" + "".join(f"{t:>11.3f}s" for t in times) + f"{ratio:>9.2f}x")
    if len(pairs) > 1:
        diff = np.max(np.abs(pairs[0].u.values - pairs[1].u.values))
        print(f"max nodal difference between backends: {diff:.2e}")


if __name__ == "__main__":
    main()
