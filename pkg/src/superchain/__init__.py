"""Numerical toolkit for gl(m|n) XXX spin chains and Gaudin models.

Graded tensor algebra, fused R-matrices, transfer matrices, Bethe vectors and
Bethe equations for the XXX chain, the Gaudin counterparts built from
pseudo-differential operators, and the classical limit connecting the two.
"""

from ._kernels import JIT_ENABLED
from .graded import GradedSpace, SuperOp
from .modules import ChainSpec, parse_rep
from .gaudin import GaudinSystem

__all__ = ["JIT_ENABLED", "GradedSpace", "SuperOp", "ChainSpec", "parse_rep", "GaudinSystem"]
__version__ = "0.1.0"
