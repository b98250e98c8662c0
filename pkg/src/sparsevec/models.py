"""Synthetic data generators, circulant algebra, whitening, and instance I/O.

Four generative models are covered:

* DPCP   -- inliers spanning a subspace plus sphere-uniform outliers; the
            targets are the unit normals of the inlier subspace.
* ODL    -- Y = A X with orthogonal A and Bernoulli-Gaussian X; targets are
            the signed dictionary columns.
* PSV    -- a single sparse vector planted in a random subspace.
* MCS-BD -- lifted multichannel circular convolutions y_i = a0 (*) x_i;
            targets are the signed normalized rows of C_{a0}^{-1}.

All generators are deterministic given their seed.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficient

KERNEL_SPECTRUM_FLOOR = 1e-3  # min |DFT(a0)| relative to ||a0||, invertibility margin


# ---------------------------------------------------------------------------
# target sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubspaceComplement:
    """Targets are the unit sphere of span(B), B an orthonormal n x r basis."""
    B: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=np.float64)
        if B.ndim != 2 or not (1 <= B.shape[1] < B.shape[0]):
            raise ValueError(f"B must be n x r with 1 <= r < n, got {B.shape}")
        if np.max(np.abs(B.T @ B - np.eye(B.shape[1]))) > 1e-10:
            raise ValueError("B is not orthonormal")
        object.__setattr__(self, "B", B)


@dataclass(frozen=True)
class SignedColumns:
    """Targets are the signed columns of an orthogonal matrix A."""
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if np.max(np.abs(A.T @ A - np.eye(A.shape[0]))) > 1e-10:
            raise ValueError("A is not orthogonal")
        object.__setattr__(self, "A", A)


@dataclass(frozen=True)
class SignedShifts:
    """Targets are the signed columns of Q (normalized back-solved shifts)."""
    Q: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=np.float64)
        if np.max(np.abs(np.linalg.norm(Q, axis=0) - 1.0)) > 1e-12:
            raise ValueError("columns of Q must be unit norm")
        object.__setattr__(self, "Q", Q)


@dataclass(frozen=True)
class PlantedVector:
    """A single target vector, up to sign."""
    q_star: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q_star, dtype=np.float64)
        if abs(np.linalg.norm(q) - 1.0) > 1e-10:
            raise ValueError("q_star must be unit norm")
        object.__setattr__(self, "q_star", q)


@dataclass
class ProblemInstance:
    Y: np.ndarray
    kind: str  # psv | dpcp | odl | mcsbd | custom
    targets: object = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.Y = np.ascontiguousarray(self.Y, dtype=np.float64)
        if not np.all(np.isfinite(self.Y)):
            raise ValueError("Y contains non-finite entries")

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def p(self):
        return self.Y.shape[1]


# ---------------------------------------------------------------------------
# circulant algebra
# ---------------------------------------------------------------------------

def circ_conv(a, x):
    """Circular convolution with e1 as identity: (a*x)_k = sum_j a_j x_{k-j mod n}."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.shape != x.shape:
        raise ValueError("length mismatch")
    return np.real(np.fft.ifft(np.fft.fft(a) * np.fft.fft(x)))


def circulant_matrix(v):
    """Circulant matrix with column j = v circularly shifted by j; C_v x = v (*) x."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return v[idx]


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _bernoulli_gaussian(rng, shape, theta):
    return (rng.random(shape) < theta) * rng.standard_normal(shape)


def _unit_columns(M):
    return M / np.linalg.norm(M, axis=0, keepdims=True)


def gen_dpcp(n, r, p1, p2, seed):
    """Inliers on the unit sphere of a random (n-r)-dim subspace plus uniform outliers."""
    if not (1 <= r < n):
        raise ValueError(f"need 1 <= r < n, got r={r}, n={n}")
    if p1 < 0 or p2 < 0 or p1 + p2 < 1:
        raise ValueError("need p1, p2 >= 0 and p1 + p2 >= 1")
    rng = np.random.default_rng(seed)
    frame, _ = np.linalg.qr(rng.standard_normal((n, n)))
    U, B = frame[:, : n - r], frame[:, n - r:]
    X = U @ _unit_columns(rng.standard_normal((n - r, p1))) if p1 else np.zeros((n, 0))
    O = _unit_columns(rng.standard_normal((n, p2))) if p2 else np.zeros((n, 0))
    Y = np.hstack([X, O])[:, rng.permutation(p1 + p2)]
    params = dict(n=n, r=r, p1=p1, p2=p2, seed=seed)
    return ProblemInstance(Y, "dpcp", SubspaceComplement(B), params)


def gen_odl(n, p, theta, seed):
    """Y = A X with a Haar-orthogonal dictionary and Bernoulli-Gaussian code."""
    if not (0 <= theta <= 1):
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    if n < 2 or p < 1:
        raise ValueError("need n >= 2 and p >= 1")
    rng = np.random.default_rng(seed)
    A, _ = np.linalg.qr(rng.standard_normal((n, n)))
    X = _bernoulli_gaussian(rng, (n, p), theta)
    params = dict(n=n, p=p, theta=theta, seed=seed, X=X)
    return ProblemInstance(A @ X, "odl", SignedColumns(A), params)


def gen_psv(p, n, theta, seed):
    """A sparse vector planted in an otherwise random n-dim subspace of R^p."""
    if not (2 <= n < p):
        raise ValueError(f"need 2 <= n < p, got n={n}, p={p}")
    if not (0 < theta <= 1):
        raise ValueError(f"theta must be in (0, 1], got {theta}")
    rng = np.random.default_rng(seed)
    x0 = _bernoulli_gaussian(rng, p, theta)
    while not np.any(x0):
        x0 = _bernoulli_gaussian(rng, p, theta)
    G = rng.standard_normal((n - 1, p))
    Q, _ = np.linalg.qr(np.vstack([x0, G]).T)
    # Rotate the basis so the planted direction is generic in coordinates;
    # QR alone would leave it axis-aligned, which trivializes any method
    # that exploits the coordinate frame.
    R, _ = np.linalg.qr(rng.standard_normal((n, n)))
    Y = R @ Q.T
    q_star = Y @ x0
    q_star /= np.linalg.norm(q_star)
    params = dict(n=n, p=p, theta=theta, seed=seed, x0=x0)
    return ProblemInstance(Y, "psv", PlantedVector(q_star), params)


def gen_mcsbd(n, p, theta, seed):
    """Lifted multichannel sparse blind deconvolution instance, Y = [C_y1 ... C_yp]."""
    if n < 2 or p < 1:
        raise ValueError("need n >= 2 and p >= 1")
    if not (0 < theta <= 1):
        raise ValueError(f"theta must be in (0, 1], got {theta}")
    rng = np.random.default_rng(seed)
    a0 = rng.standard_normal(n)
    while np.min(np.abs(np.fft.fft(a0))) < KERNEL_SPECTRUM_FLOOR * np.linalg.norm(a0):
        a0 = rng.standard_normal(n)
    xs = _bernoulli_gaussian(rng, (n, p), theta)
    Y = np.hstack([circulant_matrix(circ_conv(a0, xs[:, i])) for i in range(p)])
    Q = _unit_columns(np.linalg.inv(circulant_matrix(a0)).T)
    params = dict(n=n, p=p, theta=theta, seed=seed, a0=a0, X=xs)
    return ProblemInstance(Y, "mcsbd", SignedShifts(Q), params)


def mcsbd_code_matrix(instance):
    """The lifted ground-truth code [C_x1 ... C_xp] of an MCS-BD instance."""
    xs = instance.params["X"]
    return np.hstack([circulant_matrix(xs[:, i]) for i in range(xs.shape[1])])


def whiten(Y):
    """Precondition Y so that (1/p) Ybar Ybar^T is the identity."""
    Y = np.asarray(Y, dtype=np.float64)
    n, p = Y.shape
    evals, evecs = np.linalg.eigh(Y @ Y.T / p)
    floor = 1e-12 * np.max(evals) if np.max(evals) > 0 else 0.0
    if floor == 0.0 or np.any(evals < floor):
        raise RankDeficient("data covariance is numerically rank deficient")
    return (evecs / np.sqrt(evals)) @ (evecs.T @ Y)


# ---------------------------------------------------------------------------
# instance CSV I/O
# ---------------------------------------------------------------------------

_GENERATORS = {
    "dpcp": lambda prm: gen_dpcp(int(prm["n"]), int(prm["r"]), int(prm["p1"]),
                                 int(prm["p2"]), int(prm["seed"])),
    "odl": lambda prm: gen_odl(int(prm["n"]), int(prm["p"]), float(prm["theta"]),
                               int(prm["seed"])),
    "psv": lambda prm: gen_psv(int(prm["p"]), int(prm["n"]), float(prm["theta"]),
                               int(prm["seed"])),
    "mcsbd": lambda prm: gen_mcsbd(int(prm["n"]), int(prm["p"]), float(prm["theta"]),
                                   int(prm["seed"])),
}

_HEADER_PARAM_KEYS = ("n", "r", "p1", "p2", "p", "theta", "seed")


def format_instance(instance):
    """Serialize an instance to the plain-text CSV format (17 significant digits)."""
    n, p = instance.Y.shape
    parts = [f"rows={n}", f"cols={p}", f"kind={instance.kind}"]
    for key in _HEADER_PARAM_KEYS:
        if key in instance.params:
            val = instance.params[key]
            parts.append(f"{key}={val:.17g}" if isinstance(val, float) else f"{key}={val}")
    lines = ["# " + " ".join(parts)]
    for row in instance.Y:
        lines.append(",".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"


def save_instance(instance, path):
    with open(path, "w") as fh:
        fh.write(format_instance(instance))


def load_instance(path):
    """Load an instance CSV; known kinds are regenerated from their seed so the
    ground-truth targets are available."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing instance header line")
        fields = dict(tok.split("=", 1) for tok in header[1:].split() if "=" in tok)
        Y = np.loadtxt(fh, delimiter=",", ndmin=2)
    kind = fields.get("kind", "custom")
    if kind in _GENERATORS and "seed" in fields:
        inst = _GENERATORS[kind](fields)
        if inst.Y.shape != Y.shape or np.max(np.abs(inst.Y - Y)) > 1e-9:
            raise ValueError(f"{path}: stored matrix does not match its generation record")
        return inst
    return ProblemInstance(Y, "custom")


def load_points(path):
    """Load a point cloud CSV (one point per row, optional trailing label column)."""
    rows = []
    labels = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split(",")
            if toks[-1] in ("inlier", "outlier"):
                labels.append(toks[-1])
                toks = toks[:-1]
            rows.append([float(t) for t in toks])
    pts = np.asarray(rows, dtype=np.float64)
    return pts, (labels if labels else None)
