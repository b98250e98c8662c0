"""Sparsity surrogates and the composite objective f(q) = phi(Y^T q).

Four surrogates are provided: the l1 norm, the Huber loss, the pseudo-Huber
loss and logcosh.  All are even, convex, and parameterized (except l1) by a
smoothing width mu.  For l1 the subgradient selection is fixed to the
entrywise sign with sign(0) = 0.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import NonSmoothLoss, NotTwiceDifferentiable

DEFAULT_MU = 1e-2


class LossKind(Enum):
    L1 = "l1"
    HUBER = "huber"
    PSEUDO_HUBER = "pseudo_huber"
    LOGCOSH = "logcosh"


# smoothness classes: 0 = nonsmooth, 1 = C^1, inf for C^infinity
_SMOOTHNESS = {
    LossKind.L1: 0,
    LossKind.HUBER: 1,
    LossKind.PSEUDO_HUBER: np.inf,
    LossKind.LOGCOSH: np.inf,
}


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind
    mu: float = DEFAULT_MU

    def __post_init__(self):
        if self.kind is not LossKind.L1 and not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @property
    def smoothness(self):
        """0 for nonsmooth, 1 for C^1, inf for C^infinity."""
        return _SMOOTHNESS[self.kind]

    @property
    def is_smooth(self):
        return self.smoothness >= 1

    @property
    def is_twice_differentiable(self):
        return self.smoothness > 1


def l1():
    return LossSpec(LossKind.L1)


def huber(mu=DEFAULT_MU):
    return LossSpec(LossKind.HUBER, mu)


def pseudo_huber(mu=DEFAULT_MU):
    return LossSpec(LossKind.PSEUDO_HUBER, mu)


def logcosh(mu=DEFAULT_MU):
    return LossSpec(LossKind.LOGCOSH, mu)


def _check_finite(z):
    z = np.ascontiguousarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("input contains non-finite entries")
    return z


def loss_value(loss, z):
    z = _check_finite(z)
    if loss.kind is LossKind.L1:
        return kernels.l1_value(z)
    if loss.kind is LossKind.HUBER:
        return kernels.huber_value(z, loss.mu)
    if loss.kind is LossKind.PSEUDO_HUBER:
        return kernels.pseudo_huber_value(z, loss.mu)
    return kernels.logcosh_value(z, loss.mu)


def loss_grad(loss, z):
    """Entrywise derivative (a subgradient selection for l1)."""
    z = _check_finite(z)
    if loss.kind is LossKind.L1:
        return kernels.sign(z)
    if loss.kind is LossKind.HUBER:
        return kernels.huber_grad(z, loss.mu)
    if loss.kind is LossKind.PSEUDO_HUBER:
        return kernels.pseudo_huber_grad(z, loss.mu)
    return kernels.logcosh_grad(z, loss.mu)


def loss_hess_diag(loss, z):
    """Entrywise second derivative; Huber uses the a.e. convention at |z| = mu."""
    z = _check_finite(z)
    if loss.kind is LossKind.L1:
        raise NotTwiceDifferentiable("l1 loss has no second derivative")
    if loss.kind is LossKind.HUBER:
        return kernels.huber_hess(z, loss.mu)
    if loss.kind is LossKind.PSEUDO_HUBER:
        return kernels.pseudo_huber_hess(z, loss.mu)
    return kernels.logcosh_hess(z, loss.mu)


class Objective:
    """Composite objective f(q) = phi(Y^T q) over the sphere S^{n-1}."""

    def __init__(self, Y, loss):
        Y = np.ascontiguousarray(Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[0] < 2 or Y.shape[1] < 1:
            raise ValueError(f"Y must be n x p with n >= 2, p >= 1, got {Y.shape}")
        if not np.all(np.isfinite(Y)):
            raise ValueError("Y contains non-finite entries")
        self.Y = Y
        self.loss = loss
        self.Y.setflags(write=False)

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def p(self):
        return self.Y.shape[1]

    def value(self, q):
        return loss_value(self.loss, self.Y.T @ q)

    def eval(self, q):
        """Return (f(q), Euclidean gradient) at q."""
        q = np.asarray(q, dtype=np.float64)
        if q.shape[0] != self.n:
            raise ValueError("dimension mismatch")
        z = self.Y.T @ q
        return loss_value(self.loss, z), self.Y @ loss_grad(self.loss, z)

    def hess_vec(self, q, v):
        """Euclidean Hessian-vector product Y diag(phi'') Y^T v."""
        if not self.loss.is_twice_differentiable and self.loss.kind is not LossKind.HUBER:
            raise NotTwiceDifferentiable("l1 loss has no Hessian")
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.n:
            raise ValueError("dimension mismatch")
        h = loss_hess_diag(self.loss, self.Y.T @ q)
        return self.Y @ (h * (self.Y.T @ v))

    def require_smooth(self):
        if not self.loss.is_smooth:
            raise NonSmoothLoss("this solver needs a C^1 loss; got l1")


def objective_eval(obj, q):
    return obj.eval(q)


def objective_hess_vec(obj, q, v):
    return obj.hess_vec(q, v)
