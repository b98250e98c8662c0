"""The optimization algorithms over the sphere.

Smooth losses: Riemannian gradient descent (solve_rgd) and a Steihaug-CG
Riemannian trust region (solve_rtr).  Nonsmooth l1: Riemannian subgradient
descent (solve_rsg), the manifold proximal point method (solve_manppa), the
linearize-and-project method (solve_alp), iteratively reweighted least
squares (solve_irls), and the per-coordinate l1/linf LP baseline
(solve_linf_relaxation).  round_lp converts an approximate solution into an
exact one with a single constrained l1 solve.
"""

import numpy as np

from .. import sphere
from ..errors import NotTwiceDifferentiable, SubproblemFail
from ..losses import LossKind
from .inner import InnerWorkspace
from .types import (CONVERGED, MAX_ITERS, SUBPROBLEM_FAIL, Backtracking,
                    SolveResult, SolverConfig, Trace, describe_schedule)


def _dist_fn(targets):
    if targets is None:
        return lambda q: None
    from ..diagnostics import dist_to_targets
    return lambda q: dist_to_targets(q, targets)


def _trace(name, obj, config, targets, extra=None):
    meta = {
        "solver": name,
        "loss": obj.loss.kind.value,
        "mu": obj.loss.mu,
        "n": obj.n,
        "p": obj.p,
        "schedule": describe_schedule(config.schedule),
        "max_iters": config.max_iters,
        "grad_tol": config.grad_tol,
        "step_tol": config.step_tol,
    }
    if extra:
        meta.update(extra)
    return Trace(meta), _dist_fn(targets)


def _finish(q, status, trace):
    return SolveResult(q_final=q, status=status, trace=trace)


def _degenerate(obj, q0, name, config, targets):
    """All-zero data: every point is optimal."""
    trace, dist = _trace(name, obj, config, targets)
    trace.append(0, 0.0, 0.0, dist(q0))
    return _finish(q0, CONVERGED, trace)


# ---------------------------------------------------------------------------
# first-order methods
# ---------------------------------------------------------------------------

def _descend(obj, q0, config, targets, name, grad_of):
    """Shared gradient/subgradient loop: q <- retract(q, -eta * g)."""
    q = sphere.check_unit(q0)
    if not np.any(obj.Y):
        return _degenerate(obj, q, name, config, targets)
    trace, dist = _trace(name, obj, config, targets)
    sched = config.schedule
    backtracking = isinstance(sched, Backtracking)
    f, g = grad_of(q)
    for k in range(config.max_iters):
        gnorm = np.linalg.norm(g)
        trace.append(k, f, gnorm, dist(q))
        if gnorm <= config.grad_tol:
            return _finish(q, CONVERGED, trace)
        if backtracking:
            eta = sched.eta0
            accepted = False
            for _ in range(sched.max_halvings):
                q_new = sphere.retract(q, -eta * g)
                f_new = obj.value(q_new)
                if f_new <= f - sched.decrease * eta * gnorm ** 2:
                    accepted = True
                    break
                eta *= sched.shrink
            if not accepted:
                return _finish(q, CONVERGED, trace)
        else:
            q_new = sphere.retract(q, -sched.step(k) * g)
        step = np.linalg.norm(q_new - q)
        q = q_new
        f, g = grad_of(q)
        if step <= config.step_tol:
            trace.append(k + 1, f, np.linalg.norm(g), dist(q))
            return _finish(q, CONVERGED, trace)
    trace.append(config.max_iters, f, np.linalg.norm(g), dist(q))
    return _finish(q, MAX_ITERS, trace)


def solve_rgd(obj, q0, config=None, targets=None):
    """Riemannian gradient descent for C^1 losses."""
    obj.require_smooth()
    config = config or SolverConfig(schedule=Backtracking())

    def grad_of(q):
        f, eg = obj.eval(q)
        return f, sphere.riem_grad(q, eg)

    return _descend(obj, q0, config, targets, "rgd", grad_of)


def solve_rsg(obj, q0, config=None, targets=None):
    """Riemannian subgradient descent for the l1 loss."""
    if obj.loss.kind is not LossKind.L1:
        raise ValueError("solve_rsg is the l1 method; use solve_rgd for smooth losses")
    config = config or SolverConfig()

    def grad_of(q):
        f, eg = obj.eval(q)
        return f, sphere.riem_grad(q, eg)

    return _descend(obj, q0, config, targets, "rsg", grad_of)


# ---------------------------------------------------------------------------
# trust region
# ---------------------------------------------------------------------------

def _steihaug_cg(g, hess, delta, rtol=1e-2):
    """Truncated CG on the tangent-space model; stops at the boundary or when
    the model gradient shrinks by rtol."""
    n = g.shape[0]
    d = np.zeros(n)
    r = g.copy()
    p = -r
    r0 = np.linalg.norm(r)
    if r0 == 0.0:
        return d
    for _ in range(2 * n):
        Hp = hess(p)
        pHp = float(p @ Hp)
        if pHp <= 0:
            # negative curvature: go to the boundary along p
            return d + _boundary_tau(d, p, delta) * p
        alpha = float(r @ r) / pHp
        d_next = d + alpha * p
        if np.linalg.norm(d_next) >= delta:
            return d + _boundary_tau(d, p, delta) * p
        r_next = r + alpha * Hp
        if np.linalg.norm(r_next) <= rtol * r0:
            return d_next
        beta = float(r_next @ r_next) / float(r @ r)
        d, r = d_next, r_next
        p = -r + beta * p
    return d


def _boundary_tau(d, p, delta):
    pp = float(p @ p)
    dp = float(d @ p)
    dd = float(d @ d)
    disc = dp * dp + pp * (delta * delta - dd)
    return (-dp + np.sqrt(max(disc, 0.0))) / pp


def solve_rtr(obj, q0, config=None, targets=None, allow_huber=False):
    """Riemannian trust region with a Steihaug-CG subproblem solver.

    Huber is only C^1; pass allow_huber=True to use its a.e. second
    derivative anyway.
    """
    if obj.loss.kind is LossKind.L1:
        raise NotTwiceDifferentiable("trust region needs a twice differentiable loss")
    if obj.loss.kind is LossKind.HUBER and not allow_huber:
        raise NotTwiceDifferentiable(
            "Huber is only C^1; pass allow_huber=True to override")
    config = config or SolverConfig()
    q = sphere.check_unit(q0)
    if not np.any(obj.Y):
        return _degenerate(obj, q, "rtr", config, targets)
    tr = config.tr
    delta = tr.delta0
    trace, dist = _trace("rtr", obj, config, targets,
                         extra={"delta0": tr.delta0, "delta_max": tr.delta_max})
    f, eg = obj.eval(q)
    g = sphere.riem_grad(q, eg)
    for k in range(config.max_iters):
        gnorm = np.linalg.norm(g)
        trace.append(k, f, gnorm, dist(q))
        if gnorm <= config.grad_tol:
            return _finish(q, CONVERGED, trace)

        def hess(v, q=q, eg=eg):
            vt = sphere.project_tangent(q, v)
            return sphere.riem_hess_apply(q, eg, obj.hess_vec(q, vt), vt)

        d = _steihaug_cg(g, hess, delta)
        model_red = -(float(g @ d) + 0.5 * float(d @ hess(d)))
        q_try = sphere.retract(q, d)
        f_try = obj.value(q_try)
        # regularize the acceptance ratio so rounding noise in f - f_try does
        # not collapse the radius once both reductions reach machine precision
        r_eps = 1e-13 * max(1.0, abs(f))
        ratio = (f - f_try + r_eps) / (model_red + r_eps) if model_red > 0 else -np.inf
        if ratio < tr.rho1:
            delta *= 0.25
        elif ratio > tr.rho2 and abs(np.linalg.norm(d) - delta) < 1e-10:
            delta = min(2.0 * delta, tr.delta_max)
        if ratio > tr.rho1 and f_try <= f + r_eps:
            q = q_try
            f, eg = obj.eval(q)
            g = sphere.riem_grad(q, eg)
        if delta < 1e-15:
            return _finish(q, CONVERGED, trace)
    trace.append(config.max_iters, f, np.linalg.norm(g), dist(q))
    return _finish(q, MAX_ITERS, trace)


# ---------------------------------------------------------------------------
# subproblem-based nonsmooth methods
# ---------------------------------------------------------------------------

def solve_alp(obj, q0, config=None, targets=None):
    """Linearize the sphere constraint and solve a sequence of l1 programs."""
    config = config or SolverConfig(max_iters=50)
    q = sphere.check_unit(q0)
    if not np.any(obj.Y):
        return _degenerate(obj, q, "alp", config, targets)
    trace, dist = _trace("alp", obj, config, targets)
    ws = InnerWorkspace(obj.Y, s=0.0, settings=config.inner)
    f, eg = obj.eval(q)
    for k in range(config.max_iters):
        trace.append(k, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
        sol = ws.solve(q, 1.0, warm=k > 0)
        if not sol.converged:
            return _finish(q, SUBPROBLEM_FAIL, trace)
        nrm = np.linalg.norm(sol.q)
        if nrm < 1e-14:
            return _finish(q, SUBPROBLEM_FAIL, trace)
        q_new = sol.q / nrm
        step = np.linalg.norm(q_new - q)
        q = q_new
        f, eg = obj.eval(q)
        if step <= config.step_tol:
            trace.append(k + 1, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
            return _finish(q, CONVERGED, trace)
    trace.append(config.max_iters, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
    return _finish(q, MAX_ITERS, trace)


def solve_manppa(obj, q0, t=1.0, alpha=1.0, config=None, targets=None):
    """Manifold proximal point: tangent descent direction from the Moreau step.

    The direction subproblem min_{d perp q} ||Y^T (q+d)||_1 + ||d||^2 / (2t)
    is solved as a constrained problem in q + d by the shared inner engine.
    """
    if not t > 0 or not alpha > 0:
        raise ValueError("t and alpha must be positive")
    config = config or SolverConfig(max_iters=50)
    q = sphere.check_unit(q0)
    if not np.any(obj.Y):
        return _degenerate(obj, q, "manppa", config, targets)
    trace, dist = _trace("manppa", obj, config, targets, extra={"t": t, "alpha": alpha})
    ws = InnerWorkspace(obj.Y, s=1.0 / t, settings=config.inner)
    f, eg = obj.eval(q)
    for k in range(config.max_iters):
        trace.append(k, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
        sol = ws.solve(q, 1.0, qbar=q, warm=k > 0)
        if not sol.converged:
            return _finish(q, SUBPROBLEM_FAIL, trace)
        d = sol.q - q
        q_new = sphere.retract(q, alpha * d)
        step = np.linalg.norm(q_new - q)
        q = q_new
        f, eg = obj.eval(q)
        if step <= config.step_tol:
            trace.append(k + 1, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
            return _finish(q, CONVERGED, trace)
    trace.append(config.max_iters, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
    return _finish(q, MAX_ITERS, trace)


def solve_irls(obj, q0, delta=1e-12, config=None, targets=None):
    """Iteratively reweighted least squares: smallest eigenvector of the
    weighted covariance, weights 1/max(delta, |y_i^T q|)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    config = config or SolverConfig(max_iters=100)
    q = sphere.check_unit(q0)
    if not np.any(obj.Y):
        return _degenerate(obj, q, "irls", config, targets)
    trace, dist = _trace("irls", obj, config, targets, extra={"delta": delta})
    Y = obj.Y
    f, eg = obj.eval(q)
    for k in range(config.max_iters):
        trace.append(k, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
        w = 1.0 / np.maximum(delta, np.abs(Y.T @ q))
        M = (Y * w) @ Y.T
        evals, evecs = np.linalg.eigh(M)
        q_new = evecs[:, 0]
        if float(q_new @ q) < 0:
            q_new = -q_new
        step = np.linalg.norm(q_new - q)
        q = q_new
        f, eg = obj.eval(q)
        if step <= config.step_tol:
            trace.append(k + 1, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
            return _finish(q, CONVERGED, trace)
    trace.append(config.max_iters, f, np.linalg.norm(sphere.riem_grad(q, eg)), dist(q))
    return _finish(q, MAX_ITERS, trace)


def solve_linf_relaxation(obj, config=None, targets=None):
    """l1 minimization under q(i) = 1 for each coordinate i; returns the best
    normalized candidate and the full per-index list (None where the inner
    solve failed)."""
    config = config or SolverConfig()
    n = obj.n
    ws = InnerWorkspace(obj.Y, s=0.0, settings=config.inner)
    per_index = []
    best_q, best_f = None, np.inf
    for i in range(n):
        c = np.zeros(n)
        c[i] = 1.0
        sol = ws.solve(c, 1.0, warm=False)
        nrm = np.linalg.norm(sol.q)
        if not sol.converged or nrm < 1e-14:
            per_index.append(None)
            continue
        qi = sol.q / nrm
        per_index.append(qi)
        # compare by the constrained objective value itself, not the value of
        # the normalized point: the relaxation is only meaningful on the
        # affine slices, and renormalizing before comparison would smuggle in
        # the spherical formulation this baseline is contrasted against
        fi = obj.value(sol.q)
        if fi < best_f:
            best_f, best_q = fi, qi
    if best_q is None:
        raise SubproblemFail("every per-coordinate subproblem failed")
    trace, dist = _trace("linf", obj, config, targets)
    trace.append(0, obj.value(best_q), 0.0, dist(best_q))
    return SolveResult(best_q, CONVERGED, trace), per_index


def round_lp(obj, q_bar, settings=None):
    """One constrained l1 solve around q_bar, then renormalize.  Inside the
    basin this turns an O(mu)-accurate smoothed solution into an exact one."""
    q_bar = sphere.check_unit(q_bar)
    ws = InnerWorkspace(obj.Y, s=0.0, settings=settings)
    sol = ws.solve(q_bar, 1.0, warm=False)
    if not sol.converged:
        raise SubproblemFail("rounding subproblem did not converge")
    nrm = np.linalg.norm(sol.q)
    if nrm < 1e-14:
        raise SubproblemFail("rounding produced a zero vector")
    return sol.q / nrm
