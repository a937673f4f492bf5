"""Exponent algebra, finite element solves and Moser-iteration diagnostics
for coupled quasilinear elliptic systems with nonlinear boundary conditions."""

__version__ = "0.1.0"

from .errors import (
    DomainMismatch, MeshMismatch, MissingOverride, MoserLabError, NegativeInput,
    NotAdmissible, NotConverged, ParseError, SingularJacobian, UnknownPreset,
)
from .hypotheses import (
    UNBOUNDED, ConditionReport, CriticalSet, HolderSplit, IterationSchedule, SystemExponents,
    check_dirichlet, check_strict, check_weak, critical_set, critical_sobolev, critical_trace,
    holder_split, schedule,
)
from .mesh import Domain, Field, Mesh, build_mesh, trace_restrict, unit_interval, unit_square
from .structure import (
    StructureSpec, evaluate, manufactured, regularized_flux_constants, verify_envelope,
)
from .solver import SolutionPair, SolveConfig, assemble_residual, solve
from .norms import (
    CertificateReport, NormLadder, boundary_lr_norm, certify, gradient_lr_norm, ladder,
    lr_norm, sign_split, sobolev_norm, tail_functionals, truncate,
)

__all__ = [
    "__version__",
    "DomainMismatch", "MeshMismatch", "MissingOverride", "MoserLabError", "NegativeInput",
    "NotAdmissible", "NotConverged", "ParseError", "SingularJacobian", "UnknownPreset",
    "UNBOUNDED", "ConditionReport", "CriticalSet", "HolderSplit", "IterationSchedule",
    "SystemExponents", "check_dirichlet", "check_strict", "check_weak", "critical_set",
    "critical_sobolev", "critical_trace", "holder_split", "schedule",
    "Domain", "Field", "Mesh", "build_mesh", "trace_restrict", "unit_interval", "unit_square",
    "StructureSpec", "evaluate", "manufactured", "regularized_flux_constants", "verify_envelope",
    "SolutionPair", "SolveConfig", "assemble_residual", "solve",
    "CertificateReport", "NormLadder", "boundary_lr_norm", "certify", "gradient_lr_norm",
    "ladder", "lr_norm", "sign_split", "sobolev_norm", "tail_functionals", "truncate",
]
