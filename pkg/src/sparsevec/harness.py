"""Experiment orchestration: configuration, runs, reproductions, and labeling.

The CLI (``sparsevec.cli``) is a thin layer over the functions here.  All
file output goes through atomic write-then-rename, and every trace header
embeds the fully resolved configuration.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from . import sphere
from .losses import DEFAULT_MU, LossKind, LossSpec, Objective
from .models import (ProblemInstance, gen_dpcp, gen_mcsbd, gen_odl, gen_psv,
                     load_instance, save_instance)
from .solvers import (Backtracking, Constant, Geometric, PolyDecay,
                      SolverConfig, deflate, init_spectral,
                      solve_alp, solve_irls, solve_linf_relaxation,
                      solve_manppa, solve_rgd, solve_rsg, solve_rtr)
from .solvers.types import InnerSettings

MODELS = ("psv", "dpcp", "odl", "mcsbd")
SOLVERS = ("rgd", "rsg", "rtr", "alp", "manppa", "irls", "linf")
DIST_SUCCESS_THRESHOLDS = (1e-4, 1e-6, 1e-8)


# ---------------------------------------------------------------------------
# flat key=value configuration
# ---------------------------------------------------------------------------

def parse_config_file(path):
    """Parse a flat key=value config file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


_DEFAULTS = {
    "loss": "l1",
    "mu": str(DEFAULT_MU),
    "solver": "rsg",
    "init": "spectral",
    "seeds": "0",
    "max_iters": "500",
    "grad_tol": "1e-8",
    "step_tol": "1e-12",
    "schedule": "geometric",
    "eta": "0.1",
    "eta0": "0.1",
    "beta": "0.97",
    "period": "1",
    "exponent": "0.5",
    "t": "1.0",
    "alpha": "1.0",
    "delta": "1e-12",
    "inner_rho": "1.0",
    "inner_tol": "1e-10",
    "inner_max_iters": "100000",
}


def resolve_config(*layers):
    """Merge config layers (later wins) on top of the defaults."""
    cfg = dict(_DEFAULTS)
    for layer in layers:
        for k, v in layer.items():
            if v is not None:
                cfg[k] = str(v)
    return cfg


def build_schedule(cfg):
    name = cfg["schedule"].lower()
    if name == "constant":
        return Constant(float(cfg["eta"]))
    if name in ("poly", "polydecay"):
        return PolyDecay(float(cfg["eta0"]), float(cfg["exponent"]))
    if name == "geometric":
        return Geometric(float(cfg["eta0"]), float(cfg["beta"]), int(cfg["period"]))
    if name == "backtracking":
        return Backtracking(float(cfg["eta0"]))
    raise ValueError(f"unknown schedule {cfg['schedule']!r}")


def build_solver_config(cfg):
    return SolverConfig(
        max_iters=int(cfg["max_iters"]),
        grad_tol=float(cfg["grad_tol"]),
        step_tol=float(cfg["step_tol"]),
        schedule=build_schedule(cfg),
        inner=InnerSettings(rho=float(cfg["inner_rho"]), tol=float(cfg["inner_tol"]),
                            max_iters=int(cfg["inner_max_iters"])),
    )


def build_loss(cfg):
    name = cfg["loss"].lower().replace("-", "_")
    kinds = {k.value: k for k in LossKind}
    if name not in kinds:
        raise ValueError(f"unknown loss {cfg['loss']!r}; choose from {sorted(kinds)}")
    return LossSpec(kinds[name], float(cfg["mu"]))


def generate_instance(cfg):
    model = cfg.get("model")
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    seed = int(cfg["seed"])
    if model == "dpcp":
        return gen_dpcp(int(cfg["n"]), int(cfg["r"]), int(cfg["p1"]),
                        int(cfg["p2"]), seed)
    if model == "odl":
        return gen_odl(int(cfg["n"]), int(cfg["p"]), float(cfg["theta"]), seed)
    if model == "psv":
        return gen_psv(int(cfg["p"]), int(cfg["n"]), float(cfg["theta"]), seed)
    return gen_mcsbd(int(cfg["n"]), int(cfg["p"]), float(cfg["theta"]), seed)


def initial_point(instance, init, seed):
    if init == "spectral":
        return init_spectral(instance.Y)
    if init == "random":
        return sphere.sample_uniform_sphere(instance.n,
                                            np.random.default_rng(seed))
    raise ValueError(f"unknown init {init!r}; choose spectral or random")


def run_solver(instance, cfg, q0=None, targets="auto"):
    """Run the configured solver on one instance; returns a SolveResult."""
    solver = cfg["solver"].lower()
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    loss = build_loss(cfg)
    if solver in ("rsg", "alp", "manppa", "irls", "linf"):
        loss = LossSpec(LossKind.L1)
    obj = Objective(instance.Y, loss)
    config = build_solver_config(cfg)
    if targets == "auto":
        targets = instance.targets
    if q0 is None and solver != "linf":
        q0 = initial_point(instance, cfg["init"], int(cfg.get("seed", 0)))
    if solver == "rgd":
        res = solve_rgd(obj, q0, config, targets)
    elif solver == "rsg":
        res = solve_rsg(obj, q0, config, targets)
    elif solver == "rtr":
        res = solve_rtr(obj, q0, config, targets)
    elif solver == "alp":
        res = solve_alp(obj, q0, config, targets)
    elif solver == "manppa":
        res = solve_manppa(obj, q0, float(cfg["t"]), float(cfg["alpha"]),
                           config, targets)
    elif solver == "irls":
        res = solve_irls(obj, q0, float(cfg["delta"]), config, targets)
    else:
        res, _ = solve_linf_relaxation(obj, config, targets)
    res.trace.meta.update({k: cfg[k] for k in sorted(cfg)
                           if k not in res.trace.meta})
    return res


# ---------------------------------------------------------------------------
# atomic file output
# ---------------------------------------------------------------------------

def atomic_write(path, text):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def save_instance_atomic(instance, path):
    from .models import format_instance
    atomic_write(path, format_instance(instance))


def save_trace_atomic(trace, path, no_timing=False):
    if no_timing:
        trace.zero_timing()
    atomic_write(path, trace.format_csv())


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

@dataclass
class RunSummary:
    rows: list = field(default_factory=list)  # (seed, dist, f, iters, ms, status)

    def add(self, seed, result):
        trace = result.trace
        last = trace.records[-1]
        self.rows.append((seed, last[3], last[1], last[0], last[4], result.status))

    def success_rate(self, threshold):
        ok = sum(1 for r in self.rows if r[1] is not None and r[1] <= threshold)
        return ok / len(self.rows) if self.rows else 0.0

    def median_iters(self):
        return float(np.median([r[3] for r in self.rows])) if self.rows else 0.0

    def format_csv(self, meta=None, no_timing=False):
        lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
        for thr in DIST_SUCCESS_THRESHOLDS:
            lines.append(f"# success_rate_{thr:g}={self.success_rate(thr):g}")
        lines.append(f"# median_iters={self.median_iters():g}")
        lines.append("seed,dist,f,iters,ms,status")
        for seed, dist, f, iters, ms, status in self.rows:
            d = "" if dist is None else f"{dist:.17g}"
            ms_s = "0" if no_timing else f"{ms:.6g}"
            lines.append(f"{seed},{d},{f:.17g},{iters},{ms_s},{status}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(cfg, out_path):
    instance = generate_instance(cfg)
    save_instance_atomic(instance, out_path)
    return instance


def cmd_solve(cfg, instance=None, instance_path=None, out_dir=None,
              track_dist=True, no_timing=False):
    """Solve one instance for every seed in the config; returns (summary, results)."""
    seeds = [int(s) for s in str(cfg["seeds"]).split(",") if s != ""]
    if not seeds:
        raise ValueError("seeds must be non-empty")
    summary = RunSummary()
    results = []
    for seed in seeds:
        run_cfg = dict(cfg, seed=seed)
        inst = instance
        if inst is None:
            inst = load_instance(instance_path) if instance_path else generate_instance(run_cfg)
        targets = inst.targets if track_dist else None
        res = run_solver(inst, run_cfg, targets=targets)
        summary.add(seed, res)
        results.append(res)
        if out_dir:
            path = os.path.join(out_dir, f"trace_{cfg['solver']}_seed{seed}.csv")
            save_trace_atomic(res.trace, path, no_timing=no_timing)
    if out_dir:
        meta = {k: cfg[k] for k in sorted(cfg)}
        atomic_write(os.path.join(out_dir, f"summary_{cfg['solver']}.csv"),
                     summary.format_csv(meta, no_timing=no_timing))
    return summary, results


FIG_DPCP = dict(model="dpcp", n=100, r=60, p1=1500, p2=3500)
FIG_ODL = dict(model="odl", n=64, theta=0.25, p=int(np.ceil(10 * 64 ** 1.5)))

# solver roster for the reproduction runs: smoothed losses for the gradient
# methods, l1 for the subgradient family
_REPRODUCE_ROSTER = (
    ("rgd", dict(loss="logcosh", schedule="backtracking", max_iters=2000)),
    ("rtr", dict(loss="logcosh", max_iters=200)),
    ("rsg", dict(schedule="geometric", max_iters=500)),
    ("manppa", dict(max_iters=50)),
    ("irls", dict(max_iters=100)),
)


def cmd_reproduce(which, out_dir, seed=0, no_timing=False):
    """Desk-scale reruns of the benchmark figures: one shared random init,
    five algorithms, one trace CSV per algorithm."""
    if which == "dpcp":
        base = dict(FIG_DPCP)
    elif which == "odl":
        base = dict(FIG_ODL)
    else:
        raise ValueError("reproduce target must be dpcp or odl")
    base["seed"] = seed
    cfg0 = resolve_config(base)
    instance = generate_instance(cfg0)
    rng = np.random.default_rng(seed + 1)
    q0 = sphere.sample_uniform_sphere(instance.n, rng)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for solver, extra in _REPRODUCE_ROSTER:
        cfg = resolve_config(base, extra, {"solver": solver})
        res = run_solver(instance, cfg, q0=q0)
        res.trace.meta["init_point_hash"] = hash_vector(q0)
        path = os.path.join(out_dir, f"{which}_{solver}.csv")
        save_trace_atomic(res.trace, path, no_timing=no_timing)
        paths.append(path)
    return paths


def hash_vector(v):
    import hashlib
    return hashlib.sha256(np.ascontiguousarray(v, dtype=np.float64).tobytes()).hexdigest()[:16]


def cmd_sweep_psv(n, p, theta_grid, seeds, out_path=None, success_dist=1e-4,
                  rsg_cfg=None, restarts=8):
    """Success-rate table comparing the subgradient method against the
    per-coordinate LP baseline on planted-sparse-vector instances.

    The LP baseline inherently searches over its n coordinate slices; the
    subgradient method is given the matching courtesy of `restarts` random
    initializations, keeping the run with the lowest final objective.
    """
    theta_grid = list(theta_grid)
    if not theta_grid:
        raise ValueError("theta grid must be non-empty")
    rows = []
    for theta in theta_grid:
        wins = {"rsg": 0, "linf": 0}
        for seed in seeds:
            inst = gen_psv(p, n, theta, seed)
            best_q, best_f = None, np.inf
            for k in range(restarts):
                # spectral init is uninformative here (Y Y^T = I), so start
                # at seeded random points
                cfg_rsg = resolve_config(dict(model="psv", solver="rsg",
                                              seed=seed * 1000 + k,
                                              init="random", max_iters=500),
                                         rsg_cfg or {})
                res = run_solver(inst, cfg_rsg)
                f = float(np.abs(inst.Y.T @ res.q_final).sum())
                if f < best_f:
                    best_f, best_q = f, res.q_final
            from .diagnostics import dist_to_targets
            if dist_to_targets(best_q, inst.targets) <= success_dist:
                wins["rsg"] += 1
            cfg_lp = resolve_config(dict(model="psv", solver="linf", seed=seed))
            res_lp = run_solver(inst, cfg_lp)
            if dist_to_targets(res_lp.q_final, inst.targets) <= success_dist:
                wins["linf"] += 1
        for method in ("rsg", "linf"):
            rows.append((theta, method, wins[method] / len(seeds)))
    text = "theta,method,success_rate\n" + "".join(
        f"{theta:g},{method},{rate:g}\n" for theta, method, rate in rows)
    if out_path:
        atomic_write(out_path, text)
    return rows


def cmd_label_pointcloud(points, r, cfg=None, tau=0.05):
    """Fit r normal vectors by spectral init + solver + deflation, then label
    each point by its relative residual against the fitted normals."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array, one point per row")
    n = points.shape[1]
    if points.shape[0] < n:
        raise ValueError(f"need at least {n} points, got {points.shape[0]}")
    norms = np.linalg.norm(points, axis=1)
    keep = norms > 0
    skipped = int(np.count_nonzero(~keep))
    Y = points[keep].T
    cfg = resolve_config(dict(solver="rsg", seed=0), cfg or {})
    normals = []
    Y_red, lift = Y, (lambda u: u)
    for _ in range(r):
        inst = ProblemInstance(Y_red, "custom")
        q0 = init_spectral(Y_red)
        res = run_solver(inst, cfg, q0=q0, targets=None)
        normals.append(lift(res.q_final))
        if len(normals) < r:
            Y_red, lift = deflate(Y, normals)
    B = np.column_stack(normals)
    labels = np.full(points.shape[0], "outlier", dtype=object)
    resid = np.zeros(points.shape[0])
    resid[keep] = np.max(np.abs(points[keep] @ B), axis=1) / norms[keep]
    labels[(resid <= tau) & keep] = "inlier"
    labels[~keep] = "skipped"
    return labels, resid, B, skipped


def format_labeled_points(points, labels):
    lines = []
    for row, lab in zip(points, labels):
        lines.append(",".join(f"{x:.17g}" for x in row) + f",{lab}")
    return "\n".join(lines) + "\n"
