"""Generator invariants, circulant algebra, whitening, and instance round-trips."""

import numpy as np
import pytest

from sparsevec import models
from sparsevec.errors import RankDeficient
from sparsevec.models import (
    PlantedVector,
    ProblemInstance,
    SignedColumns,
    SignedShifts,
    SubspaceComplement,
    circ_conv,
    circulant_matrix,
    format_instance,
    gen_dpcp,
    gen_mcsbd,
    gen_odl,
    gen_psv,
    load_instance,
    load_points,
    mcsbd_code_matrix,
    save_instance,
    whiten,
)


# ------------------------------------------------------------------ circulant


def test_circ_conv_matches_direct_sum(rng):
    n = 13
    a = rng.standard_normal(n)
    x = rng.standard_normal(n)
    direct = np.array(
        [sum(a[j] * x[(k - j) % n] for j in range(n)) for k in range(n)]
    )
    assert np.abs(circ_conv(a, x) - direct).max() <= 1e-10


def test_circ_conv_identity_and_commutativity(rng):
    n = 8
    e1 = np.zeros(n)
    e1[0] = 1.0
    a = rng.standard_normal(n)
    x = rng.standard_normal(n)
    assert np.allclose(circ_conv(e1, a), a, atol=1e-12)
    assert np.allclose(circ_conv(a, x), circ_conv(x, a), atol=1e-12)


def test_circulant_matrix_realizes_convolution(rng):
    n = 9
    v = rng.standard_normal(n)
    x = rng.standard_normal(n)
    C = circulant_matrix(v)
    assert np.allclose(C @ x, circ_conv(v, x), atol=1e-10)
    assert np.allclose(C[:, 0], v)
    # column j is v shifted by j
    assert np.allclose(C[:, 1], np.roll(v, 1))


def test_circulant_inverse_deconvolves(rng):
    rng2 = np.random.default_rng(5)
    a = rng2.standard_normal(7)
    C = circulant_matrix(a)
    x = rng2.standard_normal(7)
    assert np.allclose(np.linalg.inv(C) @ circ_conv(a, x), x, atol=1e-9)


# ----------------------------------------------------------------- generators


def test_dpcp_invariants():
    inst = gen_dpcp(n=10, r=3, p1=40, p2=60, seed=7)
    assert inst.kind == "dpcp"
    assert inst.Y.shape == (10, 100)
    B = inst.targets.B
    assert B.shape == (10, 3)
    assert np.abs(B.T @ B - np.eye(3)).max() <= 1e-10
    # columns are unit norm
    assert np.abs(np.linalg.norm(inst.Y, axis=0) - 1.0).max() <= 1e-12
    # exactly p1 columns lie in the inlier subspace (orthogonal to span(B))
    proj = np.abs(B.T @ inst.Y).max(axis=0)
    assert np.count_nonzero(proj <= 1e-10) == 40
    # covariance has exactly r eigenvalues that vanish when p2 = 0
    pure = gen_dpcp(n=8, r=3, p1=50, p2=0, seed=1)
    evals = np.linalg.eigvalsh(pure.Y @ pure.Y.T)
    assert np.count_nonzero(evals < 1e-10 * evals.max()) == 3


def test_dpcp_determinism_and_validation():
    a = gen_dpcp(6, 2, 10, 10, seed=3)
    b = gen_dpcp(6, 2, 10, 10, seed=3)
    assert np.array_equal(a.Y, b.Y)
    assert not np.array_equal(a.Y, gen_dpcp(6, 2, 10, 10, seed=4).Y)
    with pytest.raises(ValueError):
        gen_dpcp(6, 6, 10, 10, seed=0)
    with pytest.raises(ValueError):
        gen_dpcp(6, 2, 0, 0, seed=0)


def test_odl_invariants():
    inst = gen_odl(n=12, p=300, theta=0.3, seed=11)
    A = inst.targets.A
    assert np.abs(A.T @ A - np.eye(12)).max() <= 1e-10
    X = inst.params["X"]
    assert np.allclose(inst.Y, A @ X, atol=1e-12)
    # row i of X is recovered by the objective at the i-th dictionary column
    for i in (0, 5, 11):
        assert np.allclose(inst.Y.T @ A[:, i], X[i], atol=1e-10)
    # sparsity level close to theta
    frac = np.count_nonzero(X) / X.size
    assert abs(frac - 0.3) < 0.05
    with pytest.raises(ValueError):
        gen_odl(12, 300, 1.5, seed=0)


def test_psv_invariants():
    inst = gen_psv(p=200, n=8, theta=0.1, seed=2)
    Y = inst.Y
    assert Y.shape == (8, 200)
    # rows orthonormal: Y Y^T = I
    assert np.abs(Y @ Y.T - np.eye(8)).max() <= 1e-10
    # Y^T q_star is parallel to the planted x0
    x0 = inst.params["x0"]
    z = Y.T @ inst.targets.q_star
    cos = z @ x0 / (np.linalg.norm(z) * np.linalg.norm(x0))
    assert abs(abs(cos) - 1.0) <= 1e-10
    # x0 lies in the row space, so the planted vector is realizable
    assert np.linalg.norm(Y.T @ (Y @ x0) - x0) <= 1e-8 * np.linalg.norm(x0)
    with pytest.raises(ValueError):
        gen_psv(p=5, n=8, theta=0.1, seed=0)


def test_mcsbd_invariants():
    inst = gen_mcsbd(n=8, p=3, theta=0.4, seed=9)
    assert inst.Y.shape == (8, 24)
    a0 = inst.params["a0"]
    X = inst.params["X"]
    # each block is the circulant of a0 (*) x_i, equal to C_{a0} C_{x_i}
    C_a = circulant_matrix(a0)
    for i in range(3):
        blk = inst.Y[:, 8 * i: 8 * (i + 1)]
        assert np.allclose(blk, C_a @ circulant_matrix(X[:, i]), atol=1e-9)
    # lifted factorization Y = C_a * code
    code = mcsbd_code_matrix(inst)
    assert np.allclose(inst.Y, C_a @ code, atol=1e-9)
    # targets: Y^T q recovers (up to scale) a row of the sparse code
    Q = inst.targets.Q
    assert np.abs(np.linalg.norm(Q, axis=0) - 1.0).max() <= 1e-12
    q = Q[:, 0]
    scale = np.linalg.norm(np.linalg.inv(C_a).T[:, 0])
    assert np.allclose(inst.Y.T @ q * scale, code[0], atol=1e-8)


def test_mcsbd_kernel_spectrum_floor():
    for seed in range(5):
        a0 = gen_mcsbd(16, 2, 0.3, seed).params["a0"]
        margin = np.min(np.abs(np.fft.fft(a0))) / np.linalg.norm(a0)
        assert margin >= models.KERNEL_SPECTRUM_FLOOR


# ------------------------------------------------------------------- whitening


def test_whiten_identity_covariance(rng):
    Y = rng.standard_normal((6, 80)) * np.linspace(1, 5, 6)[:, None]
    Yw = whiten(Y)
    p = Y.shape[1]
    assert np.abs(Yw @ Yw.T / p - np.eye(6)).max() <= 1e-10


def test_whiten_preserves_row_space(rng):
    Y = rng.standard_normal((4, 30))
    Yw = whiten(Y)
    # whitening is a left multiplication: row spaces coincide
    Pr = np.linalg.pinv(Y) @ Y  # projector onto the row space of Y
    assert np.abs(Yw - Yw @ Pr).max() <= 1e-8


def test_whiten_rank_deficient_raises(rng):
    Y = np.zeros((4, 10))
    Y[0] = rng.standard_normal(10)
    with pytest.raises(RankDeficient):
        whiten(Y)


# ----------------------------------------------------------------- target sets


def test_target_constructors_validate(rng):
    with pytest.raises(ValueError):
        SubspaceComplement(rng.standard_normal((5, 2)))
    with pytest.raises(ValueError):
        SignedColumns(rng.standard_normal((3, 3)) + np.eye(3) * 3)
    with pytest.raises(ValueError):
        SignedShifts(rng.standard_normal((3, 3)))
    with pytest.raises(ValueError):
        PlantedVector(np.array([1.0, 1.0]))
    PlantedVector(np.array([0.6, 0.8]))


def test_problem_instance_rejects_nonfinite():
    with pytest.raises(ValueError):
        ProblemInstance(np.array([[np.inf, 0.0]]), "custom")


# ------------------------------------------------------------------------ I/O


@pytest.mark.parametrize(
    "inst",
    [
        gen_dpcp(6, 2, 8, 12, seed=5),
        gen_odl(5, 40, 0.3, seed=6),
        gen_psv(30, 5, 0.2, seed=7),
        gen_mcsbd(6, 2, 0.4, seed=8),
    ],
    ids=lambda i: i.kind,
)
def test_instance_roundtrip(inst, tmp_path):
    path = tmp_path / "inst.csv"
    save_instance(inst, path)
    back = load_instance(path)
    assert back.kind == inst.kind
    assert np.array_equal(back.Y, inst.Y)  # regenerated from seed: exact
    assert type(back.targets) is type(inst.targets)


def test_format_uses_17_digits(rng):
    inst = ProblemInstance(rng.standard_normal((2, 3)), "custom")
    text = format_instance(inst)
    vals = [float(t) for t in text.splitlines()[1].split(",")]
    assert vals == inst.Y[0].tolist()  # 17 significant digits round-trip exactly


def test_load_custom_and_bad_header(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("# rows=2 cols=2 kind=custom\n1,2\n3,4\n")
    inst = load_instance(p)
    assert inst.kind == "custom" and inst.targets is None
    assert np.array_equal(inst.Y, [[1, 2], [3, 4]])
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,4\n")
    with pytest.raises(ValueError):
        load_instance(bad)


def test_load_tampered_instance_rejected(tmp_path):
    inst = gen_psv(30, 5, 0.2, seed=7)
    path = tmp_path / "t.csv"
    text = format_instance(inst).splitlines()
    text[3] = ",".join("0" for _ in range(30))
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(ValueError):
        load_instance(path)


def test_load_points(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("# comment\n1.0,2.0,inlier\n3.0,4.0,outlier\n")
    pts, labels = load_points(p)
    assert np.array_equal(pts, [[1.0, 2.0], [3.0, 4.0]])
    assert labels == ["inlier", "outlier"]
    q = tmp_path / "plain.csv"
    q.write_text("1.0,2.0\n3.0,4.0\n")
    pts2, labels2 = load_points(q)
    assert labels2 is None and pts2.shape == (2, 2)
