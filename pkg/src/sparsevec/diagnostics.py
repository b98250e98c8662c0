"""Distance metrics, sparsity measurement, and landscape probes."""

import json
from dataclasses import dataclass

import numpy as np

from . import sphere
from .errors import AtTarget
from .losses import LossKind, loss_grad
from .models import PlantedVector, SignedColumns, SignedShifts, SubspaceComplement


def dist_to_targets(q, targets):
    """Euclidean distance from q to the target set on the sphere."""
    q = np.asarray(q, dtype=np.float64)
    if isinstance(targets, SubspaceComplement):
        if targets.B.shape[0] != q.shape[0]:
            raise ValueError("dimension mismatch")
        # nearest point of the subspace's unit sphere is normalize(B B^T q);
        # dist^2 = 2 - 2 beta rewritten as 2 w^2 / (1 + beta) with w the
        # out-of-subspace component, which avoids cancellation near 0
        b = targets.B.T @ q
        beta = min(float(np.linalg.norm(b)), 1.0)
        w = float(np.linalg.norm(q - targets.B @ b))
        return w * np.sqrt(2.0 / (1.0 + beta))
    if isinstance(targets, SignedColumns):
        if targets.A.shape[0] != q.shape[0]:
            raise ValueError("dimension mismatch")
        scores = targets.A.T @ q
        i = int(np.argmax(np.abs(scores)))
        a = targets.A[:, i] if scores[i] >= 0 else -targets.A[:, i]
        return float(np.linalg.norm(q - a))
    cols = _target_columns(targets)
    if cols.shape[0] != q.shape[0]:
        raise ValueError("dimension mismatch")
    # min over stored targets and signs (stored columns need not be orthonormal)
    d_plus = np.linalg.norm(cols - q[:, None], axis=0)
    d_minus = np.linalg.norm(cols + q[:, None], axis=0)
    return float(min(d_plus.min(), d_minus.min()))


def _target_columns(targets):
    if isinstance(targets, SignedShifts):
        return targets.Q
    if isinstance(targets, PlantedVector):
        return targets.q_star[:, None]
    raise TypeError(f"unknown target set {type(targets).__name__}")


def nearest_target(q, targets):
    """The closest target point (sign resolved); ties break at the lowest index."""
    q = np.asarray(q, dtype=np.float64)
    if isinstance(targets, SubspaceComplement):
        v = targets.B @ (targets.B.T @ q)
        nrm = np.linalg.norm(v)
        if nrm < 1e-15:
            # q orthogonal to the whole target subspace: any target is nearest
            return targets.B[:, 0]
        return v / nrm
    if isinstance(targets, SignedColumns):
        scores = targets.A.T @ q
        i = int(np.argmax(np.abs(scores)))
        return np.sign(scores[i]) * targets.A[:, i] if scores[i] != 0 else targets.A[:, i]
    cols = _target_columns(targets)
    d_plus = np.linalg.norm(cols - q[:, None], axis=0)
    d_minus = np.linalg.norm(cols + q[:, None], axis=0)
    if d_plus.min() <= d_minus.min():
        return cols[:, int(np.argmin(d_plus))]
    return -cols[:, int(np.argmin(d_minus))]


def sparsity_count(z, threshold=None):
    """Number of entries above the threshold (default 1e-6 * max |z_i|)."""
    z = np.asarray(z, dtype=np.float64)
    if threshold is None:
        threshold = 1e-6 * (np.max(np.abs(z)) if z.size else 0.0)
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return int(np.count_nonzero(np.abs(z) > threshold))


def riemannian_hessian_matrix(obj, q):
    """Dense Riemannian Hessian P (Y diag(phi'') Y^T - <q, grad f> I) P."""
    q = np.asarray(q, dtype=np.float64)
    n = q.shape[0]
    _, eg = obj.eval(q)
    P = np.eye(n) - np.outer(q, q)
    H = np.empty((n, n))
    for j in range(n):
        H[:, j] = obj.hess_vec(q, P[:, j])
    return P @ (H @ P) - float(q @ eg) * P @ P  # P (Hv - <q,g> v) with v = P e_j


def tangent_hessian_spectrum(obj, q, basis=None):
    """Eigenvalues (ascending, length n-1) of the Riemannian Hessian restricted
    to the tangent space.  Basis-independent up to round-off."""
    q = sphere.check_unit(q)
    V = basis if basis is not None else sphere.tangent_basis(q)
    H = riemannian_hessian_matrix(obj, q)
    return np.sort(np.linalg.eigvalsh(V.T @ H @ V))


def tangent_hessian_eigs(obj, q, basis=None):
    """Like tangent_hessian_spectrum but also returns eigenvectors lifted to R^n."""
    q = sphere.check_unit(q)
    V = basis if basis is not None else sphere.tangent_basis(q)
    H = riemannian_hessian_matrix(obj, q)
    evals, evecs = np.linalg.eigh(V.T @ H @ V)
    return evals, V @ evecs


def regularity_estimate(obj, q, targets):
    """<q - P(q), sub_R f(q)> / dist(q, targets) for the l1 subgradient selection.

    A positive value certifies the regularity condition at q with at least
    that constant.
    """
    if obj.loss.kind is not LossKind.L1:
        raise ValueError("the regularity probe uses the l1 subgradient")
    q = sphere.check_unit(q)
    d = dist_to_targets(q, targets)
    if d <= 1e-12:
        raise AtTarget("q is (numerically) a target point; the estimate is undefined")
    sub = sphere.riem_grad(q, obj.Y @ loss_grad(obj.loss, obj.Y.T @ q))
    return float((q - nearest_target(q, targets)) @ sub) / d


@dataclass
class LandscapeReport:
    q: np.ndarray
    f: float
    riem_grad_norm: float
    tangent_hessian_eigs: np.ndarray  # None for nonsmooth losses
    dist: float  # None without targets
    regularity_ratio: float  # None for smooth losses or at targets
    meta: dict

    def to_record(self):
        """Flat key/value text record (JSON object, one level deep)."""
        rec = {
            "f": self.f,
            "riem_grad_norm": self.riem_grad_norm,
            "q": [float(x) for x in self.q],
        }
        if self.tangent_hessian_eigs is not None:
            rec["tangent_hessian_eigs"] = [float(x) for x in self.tangent_hessian_eigs]
        if self.dist is not None:
            rec["dist"] = self.dist
        if self.regularity_ratio is not None:
            rec["regularity_ratio"] = self.regularity_ratio
        rec.update(self.meta)
        return json.dumps(rec)


def landscape_report(obj, q, targets=None):
    """Evaluate every applicable probe at q."""
    q = sphere.check_unit(q)
    f, eg = obj.eval(q)
    gnorm = float(np.linalg.norm(sphere.riem_grad(q, eg)))
    eigs = None
    if obj.loss.is_twice_differentiable:
        eigs = tangent_hessian_spectrum(obj, q)
    dist = dist_to_targets(q, targets) if targets is not None else None
    reg = None
    if obj.loss.kind is LossKind.L1 and targets is not None and dist > 0:
        reg = regularity_estimate(obj, q, targets)
    meta = {"loss": obj.loss.kind.value, "mu": obj.loss.mu}
    return LandscapeReport(q, float(f), gnorm, eigs, dist, reg, meta)


def saddle_dichotomy(obj, q, targets, mu, min_eig_saddle=-1e-3,
                     min_eig_floor=-1e-4, dist_factor=10.0):
    """Classify a numerically-critical point as 'minimizer', 'saddle', or
    'ambiguous' per the spectrum/distance dichotomy.  Thresholds are
    calibrated on identity-dictionary data."""
    eigs = tangent_hessian_spectrum(obj, q)
    d = dist_to_targets(q, targets)
    if eigs[0] >= min_eig_floor and d <= dist_factor * mu:
        return "minimizer"
    if eigs[0] <= min_eig_saddle:
        return "saddle"
    return "ambiguous"
