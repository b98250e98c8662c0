"""Riemannian primitives on the unit sphere S^{n-1}.

Points are plain float64 ndarrays of unit norm; tangent vectors are ndarrays
orthogonal to their base point.  ``check_unit`` / ``check_tangent`` enforce
the invariants at the public API boundary; internal solver code re-projects
instead of rejecting.
"""

import numpy as np

from .errors import ZeroRetraction

UNIT_TOL = 1e-12
TANGENT_TOL = 1e-10


def check_unit(q):
    """Validate and return q as a unit-norm float64 vector of length >= 2."""
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] < 2:
        raise ValueError(f"expected a vector of length >= 2, got shape {q.shape}")
    nrm = np.linalg.norm(q)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"not a unit vector: ||q|| = {nrm!r}")
    if abs(nrm - 1.0) > UNIT_TOL:
        q = q / nrm
    return q


def check_tangent(q, v):
    """Validate v as tangent at q; re-project round-off level violations."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != q.shape:
        raise ValueError(f"dimension mismatch: {v.shape} vs {q.shape}")
    nrm = np.linalg.norm(v)
    if abs(np.dot(q, v)) > TANGENT_TOL * max(nrm, 1.0):
        raise ValueError("vector is not tangent at q")
    return v - np.dot(q, v) * q


def project_tangent(q, v):
    """Project v onto the tangent space at q: v - <q,v> q."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != q.shape:
        raise ValueError(f"dimension mismatch: {v.shape} vs {q.shape}")
    return v - np.dot(q, v) * q


def retract(q, d):
    """Metric-projection retraction: normalize q + d back onto the sphere."""
    s = q + d
    nrm = np.linalg.norm(s)
    if nrm < 1e-14:
        raise ZeroRetraction("q + d is numerically zero")
    return s / nrm


def riem_grad(q, euclid_grad):
    """Riemannian gradient: tangent component of the Euclidean gradient."""
    return project_tangent(q, euclid_grad)


def riem_hess_apply(q, euclid_grad, euclid_hess_vec, v):
    """Riemannian Hessian-vector product at q.

    ``euclid_hess_vec`` must be the Euclidean Hessian applied to v.  The
    sphere's curvature contributes the -<q, grad f> v correction.
    """
    euclid_hess_vec = np.asarray(euclid_hess_vec, dtype=np.float64)
    if euclid_hess_vec.shape != q.shape or np.shape(v) != q.shape:
        raise ValueError("dimension mismatch")
    return project_tangent(q, euclid_hess_vec - np.dot(q, euclid_grad) * v)


def sample_uniform_sphere(n, rng):
    """Uniform point on S^{n-1}: a normalized standard-normal draw."""
    if n < 2:
        raise ValueError("n must be >= 2")
    while True:
        x = rng.standard_normal(n)
        nrm = np.linalg.norm(x)
        if nrm > 1e-12:
            return x / nrm


def tangent_basis(q):
    """An orthonormal basis of the tangent space at q, as columns of an n x (n-1) matrix."""
    n = q.shape[0]
    # Householder reflector mapping e1 -> q; its last n-1 columns span q-perp.
    w = q.copy()
    w[0] += 1.0 if q[0] >= 0 else -1.0
    w /= np.linalg.norm(w)
    H = np.eye(n) - 2.0 * np.outer(w, w)
    return H[:, 1:]
