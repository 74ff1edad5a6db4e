"""Overcomplete independent component analysis via a semidefinite
relaxation: generalized-covariance subspace estimation plus a projected
accelerated-gradient atom solver with deflation.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
