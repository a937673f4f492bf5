"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``MOSERLAB_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("MOSERLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

# numpy's vectorized pow beats scalar libm calls in the compiled loop (see
# benchmarks/bench_kernels.py), so the power sum always uses the fallback.
power_sum = _kernels_py.power_sum
flux_local = _impl.flux_local
mass_local = _impl.mass_local
