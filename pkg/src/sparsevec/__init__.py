"""sparsevec: finding the sparsest nonzero vector in a subspace.

The problem min ||Y^T q||_0 over nonzero q is relaxed to minimizing a
sparsity surrogate over the unit sphere and attacked with Riemannian
first- and second-order methods, subproblem-based nonsmooth methods, and an
LP-style baseline, together with the synthetic data models, diagnostics, and
a reproducible benchmark harness.
"""

from . import diagnostics, models, solvers, sphere
from .losses import (DEFAULT_MU, LossKind, LossSpec, Objective, huber, l1,
                     logcosh, loss_grad, loss_hess_diag, loss_value,
                     pseudo_huber)

__version__ = "0.1.0"

__all__ = [
    "diagnostics", "models", "solvers", "sphere",
    "DEFAULT_MU", "LossKind", "LossSpec", "Objective",
    "huber", "l1", "logcosh", "pseudo_huber",
    "loss_grad", "loss_hess_diag", "loss_value",
]
