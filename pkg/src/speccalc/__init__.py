"""Numerical experiments for sectorial functional calculus on matrices.

Subpackage map:
    special    Gamma, finite-difference symbols, kernel integrals
    grids      uniform sample grids, Fourier/Mellin transforms
    spaces     partitions of unity and multiplier norms
    corpus     named test-function corpus
    operators  sectorial matrices, calculi, operator families
    rbound     Rademacher averages and R-bound estimation
    suite      equivalence-condition experiments
    cli        command line runner and report comparison
"""

__version__ = "0.1.0"

from . import _kernels

KERNEL_BACKEND = _kernels.BACKEND
