"""Initialization, deflation, and full-dictionary recovery."""

from dataclasses import dataclass

import numpy as np

from .. import sphere
from ..errors import IncompleteRecovery
from ..losses import Objective, l1
from .methods import solve_rsg
from .types import SolverConfig


def init_spectral(Y):
    """Unit eigenvector of the smallest eigenvalue of Y Y^T.

    The sign is fixed so the largest-magnitude entry is positive; eigenvalue
    ties resolve to whatever the symmetric eigensolver returns first, i.e.
    the lowest index.
    """
    Y = np.asarray(Y, dtype=np.float64)
    _, evecs = np.linalg.eigh(Y @ Y.T)
    q = evecs[:, 0]
    i = int(np.argmax(np.abs(q)))
    if q[i] < 0:
        q = -q
    return q / np.linalg.norm(q)


def deflate(Y, found):
    """Restrict the problem to the orthogonal complement of the found vectors.

    Returns (Y_reduced, lift) where Y_reduced = Bhat^T Y for an orthonormal
    basis Bhat of the complement and lift maps reduced solutions back to R^n.
    """
    Y = np.asarray(Y, dtype=np.float64)
    n = Y.shape[0]
    if not found:
        return Y, lambda u: np.asarray(u, dtype=np.float64)
    F = np.column_stack(found)
    G = F.T @ F
    if np.max(np.abs(G - np.eye(F.shape[1]))) > 1e-8:
        raise ValueError("found vectors must be mutually orthonormal")
    if n - F.shape[1] < 2:
        raise ValueError("complement dimension would drop below 2")
    # complement basis from the full QR of [found | I]
    Q, _ = np.linalg.qr(np.hstack([F, np.eye(n)]))
    Bhat = Q[:, F.shape[1]: n]
    return Bhat.T @ Y, lambda u: Bhat @ np.asarray(u, dtype=np.float64)


@dataclass
class MatchReport:
    """Greedy signed-permutation alignment of recovered atoms to the truth."""
    permutation: list  # recovered column index per true column, -1 if unmatched
    signs: list
    distances: list  # ||a_true - sign * a_hat|| per true column, inf if unmatched

    @property
    def n_matched(self):
        return sum(1 for j in self.permutation if j >= 0)


def match_atoms(A_true, A_hat):
    """Greedily pair true columns with recovered columns by |cosine|, best first."""
    n = A_true.shape[1]
    m = A_hat.shape[1]
    cos = A_true.T @ A_hat
    perm = [-1] * n
    signs = [0.0] * n
    dists = [np.inf] * n
    pairs = sorted(((-abs(cos[i, j]), i, j) for i in range(n) for j in range(m)))
    used_i, used_j = set(), set()
    for _, i, j in pairs:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        sgn = 1.0 if cos[i, j] >= 0 else -1.0
        perm[i] = j
        signs[i] = sgn
        dists[i] = float(np.linalg.norm(A_true[:, i] - sgn * A_hat[:, j]))
    return MatchReport(perm, signs, dists)


def recover_dictionary(instance, config=None, trials=None, seed=0,
                       solve=None, dedup_cos=0.99):
    """Collect distinct sphere solutions from repeated random starts.

    Solutions with pairwise |cosine| > dedup_cos are treated as the same atom
    up to sign.  Raises IncompleteRecovery (carrying the partial result) if
    fewer than n distinct atoms are found.
    """
    if instance.kind != "odl":
        raise ValueError("recover_dictionary expects an ODL instance")
    n = instance.n
    trials = trials or 20 * n
    config = config or SolverConfig(max_iters=300)
    obj = Objective(instance.Y, l1())
    rng = np.random.default_rng(seed)
    if solve is None:
        solve = lambda o, q0: solve_rsg(o, q0, config)
    atoms = []
    for _ in range(trials):
        res = solve(obj, sphere.sample_uniform_sphere(n, rng))
        q = res.q_final
        dup = False
        for a in atoms:
            if abs(float(a @ q)) > dedup_cos:
                dup = True
                break
        if not dup:
            atoms.append(q)
        if len(atoms) == n:
            break
    A_hat = np.column_stack(atoms) if atoms else np.zeros((n, 0))
    report = match_atoms(instance.targets.A, A_hat)
    if len(atoms) < n:
        raise IncompleteRecovery(
            f"found {len(atoms)} of {n} atoms in {trials} trials",
            atoms=A_hat, report=report)
    return A_hat, report
