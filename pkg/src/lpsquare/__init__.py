"""Parameterized Littlewood-Paley square functions with variable kernels: quadrature,
atoms, and a verification harness for their decay, L^p and weak-L^p bounds."""

__version__ = "0.1.0"

from .atoms import Atom, BlockSum, WeakHardySequence, build_atom, build_weak_hardy, verify_atom
from .exceptions import (DomainError, LPSquareError, ParameterError, TruncationError,
                         WindowError)
from .kernel import KernelSpec, get_kernel, omega2
from .operators import (AreaIntegral, GStarFunction, OperatorParams, evaluate_on_grid, mu_s,
                        mu_star)
from .quad import QuadPlan, inner_integral

__all__ = [
    "Atom", "BlockSum", "WeakHardySequence", "build_atom", "build_weak_hardy", "verify_atom",
    "DomainError", "LPSquareError", "ParameterError", "TruncationError", "WindowError",
    "KernelSpec", "get_kernel", "omega2",
    "AreaIntegral", "GStarFunction", "OperatorParams", "evaluate_on_grid", "mu_s", "mu_star",
    "QuadPlan", "inner_integral",
]
