import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def unit(v):
    return v / np.linalg.norm(v)


def random_unit(rng, n):
    return unit(rng.standard_normal(n))


# --------------------------------------------------------------------------
# independent n = 2 oracle: exhaustive search over the circle with loss
# formulas implemented directly here (not via the package kernels)
# --------------------------------------------------------------------------

_ORACLE_LOSSES = {
    "l1": lambda z, mu: np.abs(z),
    "huber": lambda z, mu: np.where(
        np.abs(z) < mu, z * z / (2.0 * mu) + mu / 2.0, np.abs(z)),
    "pseudo_huber": lambda z, mu: np.sqrt(z * z + mu * mu),
    "logcosh": lambda z, mu: np.abs(z) + mu * (
        np.log1p(np.exp(-2.0 * np.abs(z) / mu)) - np.log(2.0)),
}


def circle_grid_minimizer(Y, kind, mu=1e-2, step=1e-5):
    """Brute-force minimum of sum_i phi(y_i^T q(theta)) over theta in [0, pi)."""
    theta = np.arange(0.0, np.pi, step)
    Q = np.vstack([np.cos(theta), np.sin(theta)])
    vals = _ORACLE_LOSSES[kind](Y.T @ Q, mu).sum(axis=0)
    i = int(np.argmin(vals))
    return float(theta[i]), float(vals[i])


def angular_distance(q, theta):
    """Distance on the projective circle between unit q and angle theta."""
    a = (np.arctan2(q[1], q[0]) - theta) % np.pi
    return float(min(a, np.pi - a))
