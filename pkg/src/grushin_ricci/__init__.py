"""Doubly warped metrics with Ric >= 1 collapsing to the Grushin hemisphere.

Closed-form curvature kernels, an interval branch-and-bound certifier,
geodesic distance solvers for the reduced metrics and a small
Gromov-Hausdorff laboratory.
"""

from .params import HALF_PI, DomainError, WarpParams

__all__ = ["HALF_PI", "DomainError", "WarpParams"]
__version__ = "0.1.0"
