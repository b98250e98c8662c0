"""Hot numeric kernels with optional numba acceleration.

Every kernel here has two implementations: an ``@njit`` version compiled by
numba, and a vectorized pure-numpy fallback.  The fallback is selected by
setting the environment variable ``SPARSEVEC_NO_NUMBA=1`` before import (or
automatically when numba is not installed).  ``benchmarks/bench_kernels.py``
compares the two paths.
"""

import os

import numpy as np

NUMBA_ENABLED = os.environ.get("SPARSEVEC_NO_NUMBA", "0").lower() not in ("1", "true", "yes")
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


_LOG2 = float(np.log(2.0))


# ---------------------------------------------------------------------------
# elementwise loss kernels: numba loop versions
# ---------------------------------------------------------------------------

@njit(cache=True)
def _l1_value_nb(z):
    acc = 0.0
    for i in range(z.shape[0]):
        acc += abs(z[i])
    return acc


@njit(cache=True)
def _sign_nb(z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        if z[i] > 0.0:
            out[i] = 1.0
        elif z[i] < 0.0:
            out[i] = -1.0
        else:
            out[i] = 0.0
    return out


@njit(cache=True)
def _huber_value_nb(z, mu):
    acc = 0.0
    for i in range(z.shape[0]):
        a = abs(z[i])
        if a < mu:
            acc += z[i] * z[i] / (2.0 * mu) + mu / 2.0
        else:
            acc += a
    return acc


@njit(cache=True)
def _huber_grad_nb(z, mu):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        if abs(z[i]) < mu:
            out[i] = z[i] / mu
        elif z[i] > 0.0:
            out[i] = 1.0
        else:
            out[i] = -1.0
    return out


@njit(cache=True)
def _huber_hess_nb(z, mu):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        out[i] = 1.0 / mu if abs(z[i]) < mu else 0.0
    return out


@njit(cache=True)
def _pseudo_huber_value_nb(z, mu):
    acc = 0.0
    for i in range(z.shape[0]):
        acc += np.sqrt(z[i] * z[i] + mu * mu)
    return acc


@njit(cache=True)
def _pseudo_huber_grad_nb(z, mu):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        out[i] = z[i] / np.sqrt(z[i] * z[i] + mu * mu)
    return out


@njit(cache=True)
def _pseudo_huber_hess_nb(z, mu):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        s = z[i] * z[i] + mu * mu
        out[i] = mu * mu / (s * np.sqrt(s))
    return out


@njit(cache=True)
def _logcosh_value_nb(z, mu):
    # mu*log(cosh(t)) = mu*(|t| + log1p(exp(-2|t|)) - log 2), overflow-safe
    acc = 0.0
    for i in range(z.shape[0]):
        t = abs(z[i]) / mu
        acc += mu * (t + np.log1p(np.exp(-2.0 * t)) - _LOG2)
    return acc


@njit(cache=True)
def _logcosh_grad_nb(z, mu):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        out[i] = np.tanh(z[i] / mu)
    return out


@njit(cache=True)
def _logcosh_hess_nb(z, mu):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        t = np.tanh(z[i] / mu)
        out[i] = (1.0 - t * t) / mu
    return out


@njit(cache=True)
def _soft_threshold_nb(z, tau):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        if z[i] > tau:
            out[i] = z[i] - tau
        elif z[i] < -tau:
            out[i] = z[i] + tau
        else:
            out[i] = 0.0
    return out


# ---------------------------------------------------------------------------
# numpy fallbacks
# ---------------------------------------------------------------------------

def _l1_value_np(z):
    return float(np.sum(np.abs(z)))


def _sign_np(z):
    return np.sign(z)


def _huber_value_np(z, mu):
    a = np.abs(z)
    inside = a < mu
    return float(np.sum(np.where(inside, z * z / (2.0 * mu) + mu / 2.0, a)))


def _huber_grad_np(z, mu):
    return np.where(np.abs(z) < mu, z / mu, np.sign(z))


def _huber_hess_np(z, mu):
    return np.where(np.abs(z) < mu, 1.0 / mu, 0.0)


def _pseudo_huber_value_np(z, mu):
    return float(np.sum(np.sqrt(z * z + mu * mu)))


def _pseudo_huber_grad_np(z, mu):
    return z / np.sqrt(z * z + mu * mu)


def _pseudo_huber_hess_np(z, mu):
    s = z * z + mu * mu
    return mu * mu / (s * np.sqrt(s))


def _logcosh_value_np(z, mu):
    t = np.abs(z) / mu
    return float(np.sum(mu * (t + np.log1p(np.exp(-2.0 * t)) - _LOG2)))


def _logcosh_grad_np(z, mu):
    return np.tanh(z / mu)


def _logcosh_hess_np(z, mu):
    t = np.tanh(z / mu)
    return (1.0 - t * t) / mu


def _soft_threshold_np(z, tau):
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


# ---------------------------------------------------------------------------
# ADMM inner loop for  min ||Y^T q||_1 + (s/2)||q - qbar||^2  s.t.  c^T q = b
# ---------------------------------------------------------------------------
# The q-update solves the equality-constrained quadratic via a precomputed
# inverse of H = s*I + rho*Y*Y^T (desk scale: n <= a few hundred).  The caller
# supplies Hinv, hc = Hinv @ c and chc = c^T Hinv c.

def _admm_l1_affine_impl(Y, Hinv, hc, chc, c, b, s, qbar, rho, tol,
                         max_iters, z0, u0, relax):
    n, p = Y.shape
    z = z0.copy()
    u = u0.copy()
    q = np.zeros(n)
    sqrt_p = np.sqrt(p)
    it = 0
    converged = False
    while it < max_iters:
        rhs = s * qbar + rho * np.dot(Y, z - u)
        q_unc = np.dot(Hinv, rhs)
        nu = (np.dot(c, q_unc) - b) / chc
        q = q_unc - nu * hc
        ytq = np.dot(Y.T, q)
        ytq_r = relax * ytq + (1.0 - relax) * z
        z_old = z
        z = _soft_threshold(ytq_r + u, 1.0 / rho)
        u = u + ytq_r - z
        it += 1
        r_pri = np.linalg.norm(ytq - z)
        r_dual = rho * np.linalg.norm(np.dot(Y, z - z_old))
        scale = max(1.0, np.linalg.norm(z))
        if r_pri <= tol * sqrt_p * scale and r_dual <= tol * sqrt_p * scale:
            converged = True
            break
    return q, z, u, it, converged


if NUMBA_ENABLED:
    l1_value = _l1_value_nb
    sign = _sign_nb
    huber_value = _huber_value_nb
    huber_grad = _huber_grad_nb
    huber_hess = _huber_hess_nb
    pseudo_huber_value = _pseudo_huber_value_nb
    pseudo_huber_grad = _pseudo_huber_grad_nb
    pseudo_huber_hess = _pseudo_huber_hess_nb
    logcosh_value = _logcosh_value_nb
    logcosh_grad = _logcosh_grad_nb
    logcosh_hess = _logcosh_hess_nb
    _soft_threshold = _soft_threshold_nb
    admm_l1_affine = njit(cache=True)(_admm_l1_affine_impl)
else:
    l1_value = _l1_value_np
    sign = _sign_np
    huber_value = _huber_value_np
    huber_grad = _huber_grad_np
    huber_hess = _huber_hess_np
    pseudo_huber_value = _pseudo_huber_value_np
    pseudo_huber_grad = _pseudo_huber_grad_np
    pseudo_huber_hess = _pseudo_huber_hess_np
    logcosh_value = _logcosh_value_np
    logcosh_grad = _logcosh_grad_np
    logcosh_hess = _logcosh_hess_np
    _soft_threshold = _soft_threshold_np
    admm_l1_affine = _admm_l1_affine_impl

soft_threshold = _soft_threshold
