"""Step schedules, solver configuration, iteration traces, and results."""

import time
from dataclasses import dataclass, field, replace

import numpy as np


# ---------------------------------------------------------------------------
# step schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    eta: float = 0.1

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")

    def step(self, k):
        return self.eta


@dataclass(frozen=True)
class PolyDecay:
    """eta_k = eta0 / (k+1)^exponent."""
    eta0: float = 0.1
    exponent: float = 0.5

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")

    def step(self, k):
        return self.eta0 / (k + 1) ** self.exponent


@dataclass(frozen=True)
class Geometric:
    """eta_k = eta0 * beta^floor(k/period)."""
    eta0: float = 0.1
    beta: float = 0.97
    period: int = 1

    def __post_init__(self):
        if not self.eta0 > 0 or not (0 < self.beta < 1) or self.period < 1:
            raise ValueError("need eta0 > 0, 0 < beta < 1, period >= 1")

    def step(self, k):
        return self.eta0 * self.beta ** (k // self.period)


@dataclass(frozen=True)
class Backtracking:
    """Armijo line search from eta0, shrinking by `shrink` until sufficient decrease."""
    eta0: float = 1.0
    shrink: float = 0.5
    decrease: float = 1e-4
    max_halvings: int = 50

    def __post_init__(self):
        if not self.eta0 > 0 or not (0 < self.shrink < 1) or not self.decrease > 0:
            raise ValueError("invalid backtracking parameters")


def describe_schedule(sched):
    name = type(sched).__name__
    fields = ",".join(f"{k}={v}" for k, v in vars(sched).items())
    return f"{name}({fields})"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InnerSettings:
    rho: float = 1.0
    tol: float = 1e-10
    max_iters: int = 100_000

    def __post_init__(self):
        if not self.rho > 0 or not self.tol > 0:
            raise ValueError("rho and tol must be positive")


@dataclass(frozen=True)
class TrustRegionSettings:
    delta0: float = 0.1
    delta_max: float = 1.0
    rho1: float = 0.1
    rho2: float = 0.75

    def __post_init__(self):
        if not (0 < self.delta0 <= self.delta_max) or not (0 < self.rho1 < self.rho2 < 1):
            raise ValueError("invalid trust-region settings")


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 500
    grad_tol: float = 1e-8
    step_tol: float = 1e-12
    schedule: object = field(default_factory=Geometric)
    inner: InnerSettings = field(default_factory=InnerSettings)
    tr: TrustRegionSettings = field(default_factory=TrustRegionSettings)

    def __post_init__(self):
        if self.max_iters < 1 or not self.grad_tol > 0 or not self.step_tol > 0:
            raise ValueError("invalid solver config")

    def with_(self, **kwargs):
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# traces and results
# ---------------------------------------------------------------------------

TRACE_COLUMNS = ("iter", "f", "grad_norm", "dist", "elapsed_ms")


class Trace:
    """Per-iteration records; `dist` entries may be None when no targets exist."""

    def __init__(self, meta=None):
        self.meta = dict(meta or {})
        self.records = []
        self._t0 = time.perf_counter()

    def append(self, it, f, grad_norm, dist=None):
        elapsed_ms = (time.perf_counter() - self._t0) * 1e3
        if self.records and it <= self.records[-1][0]:
            raise ValueError("iteration numbers must be strictly increasing")
        self.records.append((it, float(f), float(grad_norm), dist, elapsed_ms))

    def __len__(self):
        return len(self.records)

    def column(self, name):
        j = TRACE_COLUMNS.index(name)
        return [rec[j] for rec in self.records]

    def format_csv(self):
        lines = [f"# {k}={v}" for k, v in self.meta.items()]
        has_dist = any(rec[3] is not None for rec in self.records)
        cols = TRACE_COLUMNS if has_dist else tuple(c for c in TRACE_COLUMNS if c != "dist")
        lines.append(",".join(cols))
        for it, f, g, d, ms in self.records:
            row = [str(it), f"{f:.17g}", f"{g:.17g}"]
            if has_dist:
                row.append("" if d is None else f"{d:.17g}")
            row.append(f"{ms:.6g}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.format_csv())

    def zero_timing(self):
        """Replace wall-clock entries with 0 so reruns are byte-identical."""
        self.records = [(it, f, g, d, 0.0) for it, f, g, d, _ in self.records]


CONVERGED = "Converged"
MAX_ITERS = "MaxIters"
SUBPROBLEM_FAIL = "SubproblemFail"


@dataclass
class SolveResult:
    q_final: np.ndarray
    status: str
    trace: Trace

    @property
    def converged(self):
        return self.status == CONVERGED
