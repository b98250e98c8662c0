"""Shared operator-splitting engine for the constrained l1 subproblems.

Solves
    minimize    ||Y^T q||_1 + (s/2) ||q - qbar||^2
    subject to  c^T q = b

by ADMM on the splitting z = Y^T q: a soft-threshold step on the l1 block
alternating with an affine-constrained quadratic step in q.  Because first-order
splitting alone identifies the active set quickly but polishes slowly, each
ADMM sweep is followed by an exact active-set finish: simplex-style crossover
pivoting on the vertex (s = 0) or a primal active-set pass (s > 0).  The result
is accepted only when an explicitly computed KKT residual meets the tolerance.

This one engine backs the linearized-constraint method, the manifold proximal
point method, LP rounding, and the per-coordinate l1/linf baseline.
"""

import numpy as np

from .. import kernels
from ..errors import SubproblemFail
from .types import InnerSettings

_RELAX = 1.7          # over-relaxation factor, standard range (1.5, 1.8)
_RANK_TOL = 1e-10     # relative tolerance for independence tests
_MAX_PIVOTS = 2_000   # cap on crossover pivots per polish attempt
_ZERO_LADDER = (1e-2, 1e-3, 1e-4, 1e-5)  # confident-zero cuts, relative
_MAX_ACTIVE_SET = 500  # cap on active-set iterations per polish attempt
_DUAL_SLACK = 1e-9    # tolerance on |dual| <= 1 box feasibility


class InnerSolution:
    __slots__ = ("q", "z", "u", "iters", "converged", "kkt")

    def __init__(self, q, z, u, iters, converged, kkt=np.inf):
        self.q = q
        self.z = z
        self.u = u
        self.iters = iters
        self.converged = converged
        self.kkt = kkt


def _greedy_basis(Y, c, order, limit):
    """Pick indices from `order` whose columns, together with c, stay linearly
    independent; stop after `limit` picks.  Returns the index list."""
    n = Y.shape[0]
    Q = np.empty((n, min(n, limit + 1)))
    Q[:, 0] = c / np.linalg.norm(c)
    k = 1
    picked = []
    for i in order:
        if len(picked) == limit or k == n:
            break
        y = Y[:, i]
        r = y - Q[:, :k] @ (Q[:, :k].T @ y)
        nr = np.linalg.norm(r)
        if nr > _RANK_TOL * max(np.linalg.norm(y), 1.0):
            Q[:, k] = r / nr
            k += 1
            picked.append(i)
    return picked


def _lp_crossover(Y, c, b, q0, cert_thresh=None):
    """From an approximate LP solution, pivot to the exact optimal vertex of
        min ||Y^T q||_1  s.t.  c^T q = b.
    Dantzig pricing with a switch to Bland's rule on degenerate plateaus;
    termination either by basis-dual feasibility or (on plateaus, since duals
    on a degenerate vertex may need to spread over dependent columns) by the
    box-constrained dual certificate over the whole zero set.  Returns
    (q, basis) or None when the data admit no full vertex or the cap is hit."""
    n, p = Y.shape
    if p == 0:
        return b * c / float(c @ c), np.empty(0, dtype=np.intp)
    t0 = Y.T @ q0
    basis = _greedy_basis(Y, c, np.argsort(np.abs(t0)), n - 1)
    if len(basis) < n - 1:
        return None
    basis = np.array(basis, dtype=np.intp)
    rhs = np.zeros(n)
    rhs[0] = b
    best_obj = np.inf
    best = None
    stall = 0
    for _ in range(_MAX_PIVOTS):
        M = np.empty((n, n))
        M[:, 0] = c
        M[:, 1:] = Y[:, basis]
        try:
            q = np.linalg.solve(M.T, rhs)
        except np.linalg.LinAlgError:
            return best
        t = Y.T @ q
        t[basis] = 0.0
        obj = np.abs(t).sum()
        if obj < best_obj - 1e-11 * max(1.0, best_obj if best else 1.0):
            best_obj = obj
            best = (q, basis.copy())
            stall = 0
        else:
            stall += 1
        sigma = np.sign(t)
        g = Y @ sigma
        try:
            mult = np.linalg.solve(M, -g)
        except np.linalg.LinAlgError:
            return best
        lam = mult[1:]
        viol = np.flatnonzero(np.abs(lam) > 1.0 + _DUAL_SLACK)
        if viol.size == 0:
            return q, basis  # dual feasible: this vertex is optimal
        if stall and stall % 40 == 0 and cert_thresh is not None:
            if kkt_residual(Y, c, b, 0.0, None, q) <= cert_thresh:
                return q, basis
        bland = stall > 20
        if bland:
            j = int(viol[np.argmin(basis[viol])])
        else:
            j = int(np.argmax(np.abs(lam)))
        # leave basis[j]; move along the edge that opens t_j with sign(lam_j)
        e = np.zeros(n)
        e[j + 1] = np.sign(lam[j])
        d = np.linalg.solve(M.T, e)
        td = Y.T @ d
        theta = np.full(p, np.inf)
        moving = np.abs(td) > 1e-14
        moving[basis] = False
        theta[moving] = -t[moving] / td[moving]
        theta[theta < -1e-12] = np.inf
        tmin = theta.min()
        if not np.isfinite(tmin):
            return best  # unbounded edge: degenerate data
        ties = np.flatnonzero(theta <= tmin + 1e-12 * max(1.0, tmin))
        if bland:
            i_star = int(ties.min())
        else:
            i_star = int(ties[np.argmax(np.abs(td[ties]))])
        basis[j] = i_star
    return best


def _project_affine(E, r, q):
    """Project q onto {x : E^T x = r} (E has full column rank)."""
    G = E.T @ E
    return q - E @ np.linalg.solve(G, E.T @ q - r)


def _qp_active_set(Y, c, b, s, qbar, q0):
    """Exact solve of  min (s/2)||q - qbar||^2 + ||Y^T q||_1  s.t. c^T q = b
    (s > 0) by a primal active-set method started from an approximate q0.
    Returns (q, zero_set) or None if the iteration cap is hit."""
    n, p = Y.shape
    if p == 0:
        E = c[:, None]
        return _project_affine(E, np.array([b]), qbar), []
    t = Y.T @ q0
    scale = max(1.0, np.max(np.abs(t)))
    order = np.argsort(np.abs(t))
    confident = order[np.abs(t[order]) <= 1e-5 * scale]
    zset = _greedy_basis(Y, c, confident, n - 1)
    sigma = np.sign(t)
    sigma[zset] = 0.0

    def constraint_cols(zs):
        E = np.empty((n, len(zs) + 1))
        E[:, 0] = c
        if zs:
            E[:, 1:] = Y[:, zs]
        return E

    E = constraint_cols(zset)
    r = np.zeros(E.shape[1])
    r[0] = b
    q_cur = _project_affine(E, r, q0)
    t_cur = Y.T @ q_cur
    t_cur[zset] = 0.0
    for _ in range(_MAX_ACTIVE_SET):
        w = qbar - (Y @ sigma) / s
        G = E.T @ E
        try:
            d = np.linalg.solve(G, E.T @ w - r)
        except np.linalg.LinAlgError:
            return None
        q_star = w - E @ d
        t_star = Y.T @ q_star
        t_star[zset] = 0.0
        # first sign crossing on the inactive set blocks the step; judged by
        # the maintained sign state, since a freshly released coordinate sits
        # at noise level and its raw sign is meaningless
        crossing = (sigma != 0) & (sigma * t_star < 0)
        if np.any(crossing):
            idx = np.flatnonzero(crossing)
            thetas = np.clip(t_cur[idx] / (t_cur[idx] - t_star[idx]), 0.0, 1.0)
            k = int(np.argmin(thetas))
            theta, i_star = float(thetas[k]), int(idx[k])
            q_cur = q_cur + theta * (q_star - q_cur)
            t_cur = Y.T @ q_cur
            t_cur[zset] = 0.0
            t_cur[i_star] = 0.0
            sigma[i_star] = 0.0
            # grow the working set only if the new column is independent
            cand = _greedy_basis(np.concatenate(
                [E[:, 1:], Y[:, [i_star]]], axis=1), c,
                list(range(E.shape[1])), n - 1)
            if len(cand) == E.shape[1]:  # all old columns plus the new one
                zset.append(i_star)
                E = constraint_cols(zset)
                r = np.zeros(E.shape[1])
                r[0] = b
                q_cur = _project_affine(E, r, q_cur)
                t_cur = Y.T @ q_cur
                t_cur[zset] = 0.0
            continue
        # full step accepted: check dual feasibility of the working set
        lam = s * d[1:]
        if lam.size and np.max(np.abs(lam)) > 1.0 + _DUAL_SLACK:
            j = int(np.argmax(np.abs(lam)))
            sigma[zset[j]] = np.sign(lam[j])
            del zset[j]
            E = constraint_cols(zset)
            r = np.zeros(E.shape[1])
            r[0] = b
            q_cur = q_star
            t_cur = Y.T @ q_cur
            t_cur[zset] = 0.0
            continue
        q_star_t = t_star
        # refresh signs that the step may have flipped without crossing zero;
        # noise-level magnitudes do not earn a sign
        new_sigma = np.sign(q_star_t)
        new_sigma[np.abs(q_star_t) <= 1e-12 * scale] = 0.0
        new_sigma[zset] = 0.0
        if np.array_equal(new_sigma, sigma):
            return q_star, list(zset)
        sigma = new_sigma
        q_cur, t_cur = q_star, q_star_t
    return None


def _box_lsq_residual(E, g0, d0):
    """Exact min of ||E d + g0|| with d[0] free and |d[j]| <= 1 for j >= 1,
    by a BVLS-style active set.  First-order methods stall on this problem
    when E has dependent columns, so bound sets are resolved exactly."""
    m = E.shape[1]
    d = d0.copy()
    d[1:] = np.clip(d[1:], -1.0, 1.0)
    at_bound = np.zeros(m)  # 0 = free, otherwise the bound value +-1
    # seed the bound set from the clipped warm start: components already at
    # the box edge usually stay there, which keeps the iteration count low
    edge = np.abs(d[1:]) >= 1.0 - 1e-12
    at_bound[1:][edge] = np.sign(d[1:][edge])
    best = float(np.linalg.norm(E @ d + g0))
    done = 1e-13 * max(1.0, float(np.linalg.norm(g0)))
    for _ in range(10 * m + 20):
        if best <= done:
            break
        free = at_bound == 0.0
        rhs = -(g0 + E[:, ~free] @ at_bound[~free])
        sol, *_ = np.linalg.lstsq(E[:, free], rhs, rcond=None)
        cand = at_bound.copy()
        cand[free] = sol
        over = np.abs(cand[1:]) - 1.0
        if np.max(over, initial=0.0) > 1e-12:
            j = 1 + int(np.argmax(over))
            at_bound[j] = np.sign(cand[j])
            continue
        d = cand
        best = min(best, float(np.linalg.norm(E @ d + g0)))
        # KKT on bound duals: at +1 the gradient must be <= 0, at -1 >= 0
        g = E.T @ (E @ d + g0)
        mult = at_bound * g
        j = int(np.argmax(mult))
        if mult[j] <= 1e-12 * max(1.0, best):
            break
        at_bound[j] = 0.0
    return best


def _certificate(Y, c, b, s, anchor, sol):
    """KKT violation of a solution to the constrained l1 problem, together
    with the zero-set indices and their (unclipped) stationarity duals."""
    Y = np.asarray(Y, dtype=np.float64)
    n = Y.shape[0]
    q = sol.q if isinstance(sol, InnerSolution) else np.asarray(sol)
    if anchor is None:
        anchor = np.zeros(n)
    t = Y.T @ q
    scale = max(1.0, np.max(np.abs(t)) if t.size else 0.0)
    zero = np.abs(t) <= 1e-8 * scale
    sigma = np.sign(t)
    sigma[zero] = 0.0
    g0 = s * (q - anchor) + Y @ sigma
    E = np.concatenate([c[:, None], Y[:, zero]], axis=1)
    U, S, Vt = np.linalg.svd(E, full_matrices=False)
    keep = S > max(S[0], 1.0) * 1e-12
    Ui, Si, Vi = U[:, keep], S[keep], Vt[keep]
    d = Vi.T @ ((Ui.T @ -g0) / Si)
    # alternate between the exact-stationarity affine set and the dual box;
    # the final unclipped iterate flags which frozen columns want |dual| > 1
    for _ in range(25):
        d[1:] = np.clip(d[1:], -1.0, 1.0)
        d = d - Vi.T @ ((Ui.T @ (E @ d + g0)) / Si)
    lam_raw = d[1:].copy()
    d[1:] = np.clip(d[1:], -1.0, 1.0)
    stat = _box_lsq_residual(E, g0, d)
    feas = abs(float(c @ q) - b)
    if isinstance(sol, InnerSolution):
        zcons = float(np.max(np.abs(t - sol.z))) if t.size else 0.0
    else:
        zcons = 0.0
    return max(stat, feas, zcons), np.flatnonzero(zero), lam_raw


def kkt_residual(Y, c, b, s, anchor, sol):
    """Max KKT violation of a solution to the constrained l1 problem:
    stationarity (with box-feasible duals on the zero set), primal feasibility,
    and consistency of the split variable z with Y^T q."""
    return _certificate(Y, c, b, s, anchor, sol)[0]


class InnerWorkspace:
    """Caches the factorization of H = s I + rho Y Y^T for repeated solves
    (warm starts across outer iterations reuse z and u)."""

    def __init__(self, Y, s=0.0, settings=None):
        self.Y = np.ascontiguousarray(Y, dtype=np.float64)
        self.settings = settings or InnerSettings()
        self.s = float(s)
        n = self.Y.shape[0]
        rho = self.settings.rho
        H = self.s * np.eye(n) + rho * (self.Y @ self.Y.T)
        # A tiny ridge keeps H invertible for s = 0 with rank-deficient data;
        # it perturbs only the (objective-neutral) null-space component.
        if self.s == 0.0:
            eigs_scale = np.trace(H) / n
            H = H + 1e-12 * max(eigs_scale, 1.0) * np.eye(n)
        self.Hinv = np.linalg.inv(H)
        self._z = None
        self._u = None

    def _polish(self, c, b, qbar, q, cert_thresh):
        """Active-set finish.  Columns confidently at zero are grouped: their
        span is projected out so the crossover runs on a reduced problem free
        of the degeneracy that clustered zero columns cause.  Candidates are
        accepted only through the full-problem KKT certificate; the cut that
        defines "confidently zero" is swept over a ladder."""
        Y = self.Y
        n, p = Y.shape
        t = Y.T @ q
        scale = max(1.0, float(np.max(np.abs(t))) if p else 0.0)
        tried = set()
        for tau in _ZERO_LADDER:
            zero = np.abs(t) <= tau * scale
            # Freezing a column to zero is a guess; when the certificate
            # rejects the candidate, unfreeze exactly the frozen columns whose
            # stationarity duals exceed the unit box and retry.
            for _ in range(8):
                key = zero.tobytes()
                if key in tried:
                    break
                tried.add(key)
                cand = self._reduced_vertex(c, b, qbar, q, zero)
                if cand is None:
                    break
                qp = cand
                res, zidx, lam = _certificate(Y, c, b, self.s, qbar, qp)
                if res <= cert_thresh:
                    zp = Y.T @ qp
                    zp[np.abs(zp) <= 1e-12 * max(1.0, np.max(np.abs(zp)))] = 0.0
                    return qp, zp, res
                viol = zidx[np.abs(lam) > 1.0 + _DUAL_SLACK]
                viol = viol[zero[viol]]
                if viol.size == 0:
                    break
                zero = zero.copy()
                zero[viol] = False
        return None

    def _reduced_vertex(self, c, b, qbar, q, zero):
        """Solve with the columns in `zero` frozen to zero: project out their
        span and run the exact active-set finish on the reduced problem."""
        Y = self.Y
        n = Y.shape[0]
        if np.any(zero):
            U, S, _ = np.linalg.svd(Y[:, zero], full_matrices=True)
            rank = int(np.sum(S > max(S[0], 1.0) * _RANK_TOL))
            W = U[:, rank:]
        else:
            W = np.eye(n)
        if W.shape[1] == 0:
            return None
        ct = W.T @ c
        if np.linalg.norm(ct) <= _RANK_TOL * np.linalg.norm(c):
            return None  # constraint unreachable inside the subspace
        Yr = W.T @ Y[:, ~zero]
        # columns inside the projected-out span reduce to ~0: they cannot
        # influence the reduced objective but stall pivoting (degenerate
        # zero-length steps), so drop them
        norms = np.linalg.norm(Yr, axis=0)
        keep = norms > _RANK_TOL * max(float(norms.max(initial=0.0)), 1.0)
        Yr = Yr[:, keep]
        a0 = W.T @ q
        if self.s == 0.0:
            out = _lp_crossover(Yr, ct, b, a0)
        else:
            out = _qp_active_set(Yr, ct, b, self.s, W.T @ qbar, a0)
        if out is None:
            return None
        return W @ out[0]

    def solve(self, c, b, qbar=None, warm=True):
        Y = self.Y
        n, p = Y.shape
        c = np.ascontiguousarray(c, dtype=np.float64)
        if not np.any(c):
            raise ValueError("constraint vector c must be nonzero")
        if qbar is None:
            qbar = np.zeros(n)
        qbar = np.ascontiguousarray(qbar, dtype=np.float64)
        hc = self.Hinv @ c
        chc = float(c @ hc)
        st = self.settings
        if warm and self._z is not None:
            z0, u0 = self._z, self._u
        else:
            z0, u0 = np.zeros(p), np.zeros(p)
        total = 0
        chunk = min(st.max_iters, 300)
        best = None
        while total < st.max_iters:
            chunk = min(chunk, st.max_iters - total)
            q, z, u, iters, admm_done = kernels.admm_l1_affine(
                Y, self.Hinv, hc, chc, c, float(b), self.s, qbar, st.rho,
                st.tol, chunk, z0, u0, _RELAX)
            z0, u0 = z, u
            total += iters
            scale = max(1.0, float(np.max(np.abs(z))) if p else 0.0)
            thresh = st.tol * np.sqrt(max(p, 1)) * scale
            polished = self._polish(c, b, qbar, q, thresh)
            if polished is not None:
                qp, zp, res = polished
                # warm-start state keeps the self-consistent splitting pair
                self._z, self._u = z.copy(), u.copy()
                return InnerSolution(qp, zp, u, total, True, kkt=res)
            raw = InnerSolution(q, Y.T @ q, u.copy(), total, False)
            raw.kkt = kkt_residual(Y, c, b, self.s, qbar, raw)
            if raw.kkt <= thresh:
                raw.converged = True
                self._z, self._u = raw.z.copy(), u.copy()
                return raw
            if best is None or raw.kkt < best.kkt:
                best = raw
            if admm_done:
                break  # splitting residuals met tol but KKT check did not
            chunk = min(chunk * 3, 10_000)
        self._z, self._u = z0.copy(), u0.copy()
        return best if best is not None else InnerSolution(
            q, z0, u0, total, False)


def inner_convex(Y, c, b, s=0.0, anchor=None, settings=None, workspace=None):
    """One-shot constrained l1 solve; raises SubproblemFail on non-convergence."""
    ws = workspace or InnerWorkspace(Y, s=s, settings=settings)
    sol = ws.solve(c, b, qbar=anchor, warm=workspace is not None)
    if not sol.converged:
        raise SubproblemFail(
            f"inner solver failed to certify a solution within "
            f"{ws.settings.max_iters} iterations (best KKT residual {sol.kkt:.3e})")
    return sol.q
