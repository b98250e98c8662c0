"""Finite-difference oracles and analytic properties for the sparsity surrogates."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsevec import losses
from sparsevec.errors import NonSmoothLoss, NotTwiceDifferentiable
from sparsevec.losses import (
    DEFAULT_MU,
    LossKind,
    LossSpec,
    Objective,
    huber,
    l1,
    logcosh,
    loss_grad,
    loss_hess_diag,
    loss_value,
    pseudo_huber,
)

SMOOTH = [huber(0.1), pseudo_huber(0.1), logcosh(0.1), pseudo_huber(1e-2), logcosh(1e-2)]
TWICE = [pseudo_huber(0.1), logcosh(0.1), pseudo_huber(1e-2), logcosh(1e-2)]
ALL = [l1()] + SMOOTH


def _fd_grad(f, z, h=1e-6):
    g = np.empty_like(z)
    for i in range(z.size):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2 * h)
    return g


# ---------------------------------------------------------------- derivatives


@pytest.mark.parametrize("spec", SMOOTH, ids=lambda s: f"{s.kind.value}-{s.mu}")
def test_grad_matches_finite_differences(spec, rng):
    # 100 random points, entries kept away from the Huber kink
    worst = 0.0
    for _ in range(100):
        z = rng.standard_normal(6)
        if spec.kind is LossKind.HUBER:
            z = z[np.abs(np.abs(z) - spec.mu) > 1e-3]
            if z.size == 0:
                continue
        g = loss_grad(spec, z)
        gfd = _fd_grad(lambda w: loss_value(spec, w), z)
        scale = max(1.0, np.abs(g).max())
        worst = max(worst, np.abs(g - gfd).max() / scale)
    assert worst <= 1e-5


@pytest.mark.parametrize("spec", TWICE, ids=lambda s: f"{s.kind.value}-{s.mu}")
def test_hess_matches_finite_differences(spec, rng):
    worst = 0.0
    for _ in range(100):
        z = rng.standard_normal(6)
        h = loss_hess_diag(spec, z)
        hfd = _fd_grad(lambda w: loss_grad(spec, w).sum(), z)
        scale = max(1.0, np.abs(h).max())
        worst = max(worst, np.abs(h - hfd).max() / scale)
    assert worst <= 1e-5


def test_huber_hess_piecewise(rng):
    spec = huber(0.3)
    z = rng.standard_normal(50)
    h = loss_hess_diag(spec, z)
    inside = np.abs(z) < spec.mu
    assert np.allclose(h[inside], 1.0 / spec.mu)
    assert np.allclose(h[~inside], 0.0)


# ---------------------------------------------------------- analytic identities


def test_l1_value_grad():
    z = np.array([-2.0, 0.0, 3.5])
    assert loss_value(l1(), z) == 5.5
    assert np.array_equal(loss_grad(l1(), z), [-1.0, 0.0, 1.0])


def test_l1_sign_zero_is_zero():
    assert loss_grad(l1(), np.zeros(4)).tolist() == [0.0] * 4


def test_l1_positive_homogeneity(rng):
    z = rng.standard_normal(10)
    for t in (0.5, 2.0, 7.25):
        assert loss_value(l1(), t * z) == pytest.approx(t * loss_value(l1(), z), rel=1e-12)


def test_l1_has_no_hessian():
    with pytest.raises(NotTwiceDifferentiable):
        loss_hess_diag(l1(), np.ones(3))


@pytest.mark.parametrize("spec", ALL, ids=lambda s: s.kind.value)
def test_even_and_nonnegative(spec, rng):
    z = rng.standard_normal(20)
    assert loss_value(spec, z) == pytest.approx(loss_value(spec, -z), rel=1e-14)
    assert np.allclose(loss_grad(spec, -z), -loss_grad(spec, z))
    assert loss_value(spec, z) >= 0.0
    if spec.kind is LossKind.HUBER:
        assert loss_value(spec, np.zeros(5)) == pytest.approx(5 * spec.mu / 2, rel=1e-14)
    elif spec.kind is LossKind.PSEUDO_HUBER:
        assert loss_value(spec, np.zeros(5)) == pytest.approx(5 * spec.mu, rel=1e-14)
    else:
        assert loss_value(spec, np.zeros(5)) == pytest.approx(0.0, abs=1e-15)


def test_huber_continuity_at_breakpoint():
    mu = 0.25
    spec = huber(mu)
    for s in (1.0, -1.0):
        lo = loss_value(spec, np.array([s * (mu - 1e-12)]))
        hi = loss_value(spec, np.array([s * (mu + 1e-12)]))
        assert abs(hi - lo) <= 1e-10
        glo = loss_grad(spec, np.array([s * (mu - 1e-9)]))[0]
        ghi = loss_grad(spec, np.array([s * (mu + 1e-9)]))[0]
        assert abs(ghi - glo) <= 1e-7


def test_huber_closed_form():
    mu = 0.5
    spec = huber(mu)
    z = np.array([0.2, 0.8, -1.3])
    expected = (0.2**2 / (2 * mu) + mu / 2) + 0.8 + 1.3
    assert loss_value(spec, z) == pytest.approx(expected, rel=1e-14)


def test_pseudo_huber_closed_form(rng):
    mu = 0.3
    spec = pseudo_huber(mu)
    z = rng.standard_normal(8)
    expected = np.sum(np.sqrt(z**2 + mu**2))
    assert loss_value(spec, z) == pytest.approx(expected, rel=1e-13)
    # derivative is z / sqrt(z^2 + mu^2)
    assert np.allclose(loss_grad(spec, z), z / np.sqrt(z**2 + mu**2), atol=1e-14)


def test_logcosh_closed_form(rng):
    mu = 0.2
    spec = logcosh(mu)
    z = rng.standard_normal(8)
    expected = mu * np.sum(np.log(np.cosh(z / mu)))
    assert loss_value(spec, z) == pytest.approx(expected, rel=1e-12)
    assert np.allclose(loss_grad(spec, z), np.tanh(z / mu), atol=1e-14)


def test_logcosh_bounds_l1(rng):
    # logcosh_mu(z) <= |z|_1 <= logcosh_mu(z) + mu log(2) len(z)
    mu = 0.1
    spec = logcosh(mu)
    for _ in range(20):
        z = rng.standard_normal(15) * rng.uniform(0.1, 10)
        lv = loss_value(spec, z)
        o = np.abs(z).sum()
        assert lv <= o + 1e-12
        assert o <= lv + mu * np.log(2.0) * z.size + 1e-12


def test_logcosh_no_overflow():
    z = np.array([1e4, -1e4])
    spec = logcosh(1e-2)
    v = loss_value(spec, z)
    assert np.isfinite(v)
    assert v == pytest.approx(np.abs(z).sum() - 2 * 1e-2 * np.log(2.0), rel=1e-10)


# -------------------------------------------------------------------- LossSpec


def test_spec_validation():
    with pytest.raises(ValueError):
        huber(0.0)
    with pytest.raises(ValueError):
        LossSpec(LossKind.LOGCOSH, -1.0)
    l1()  # mu unused for l1


def test_smoothness_classes():
    assert not l1().is_smooth
    assert huber(0.1).is_smooth and not huber(0.1).is_twice_differentiable
    assert pseudo_huber(0.1).is_twice_differentiable
    assert logcosh(0.1).is_twice_differentiable
    assert LossSpec(LossKind.LOGCOSH).mu == DEFAULT_MU


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        loss_value(l1(), np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        loss_grad(logcosh(0.1), np.array([np.inf]))


# ------------------------------------------------------------------- Objective


def test_objective_eval_matches_composition(rng):
    Y = rng.standard_normal((5, 12))
    obj = Objective(Y, logcosh(0.1))
    q = rng.standard_normal(5)
    z = Y.T @ q
    f, g = obj.eval(q)
    assert f == pytest.approx(loss_value(obj.loss, z), rel=1e-14)
    assert np.allclose(g, Y @ loss_grad(obj.loss, z))
    assert obj.value(q) == pytest.approx(f)
    assert (obj.n, obj.p) == (5, 12)


def test_objective_grad_finite_difference(rng):
    Y = rng.standard_normal((4, 9))
    obj = Objective(Y, pseudo_huber(0.2))
    q = rng.standard_normal(4)
    _, g = obj.eval(q)
    gfd = _fd_grad(lambda w: obj.value(w), q)
    assert np.abs(g - gfd).max() / max(1.0, np.abs(g).max()) <= 1e-5


def test_objective_hess_vec_finite_difference(rng):
    Y = rng.standard_normal((4, 9))
    obj = Objective(Y, logcosh(0.3))
    q = rng.standard_normal(4)
    v = rng.standard_normal(4)
    hv = obj.hess_vec(q, v)
    h = 1e-6
    hfd = (obj.eval(q + h * v)[1] - obj.eval(q - h * v)[1]) / (2 * h)
    assert np.abs(hv - hfd).max() / max(1.0, np.abs(hv).max()) <= 1e-5


def test_objective_validation(rng):
    with pytest.raises(ValueError):
        Objective(np.zeros((1, 3)), l1())
    with pytest.raises(ValueError):
        Objective(np.full((3, 3), np.nan), l1())
    obj = Objective(rng.standard_normal((3, 4)), l1())
    with pytest.raises(ValueError):
        obj.eval(np.zeros(5))
    with pytest.raises(NotTwiceDifferentiable):
        obj.hess_vec(np.ones(3), np.ones(3))
    with pytest.raises(NonSmoothLoss):
        obj.require_smooth()
    obj.require_smooth.__self__  # no-op; smooth case below
    Objective(rng.standard_normal((3, 4)), huber(0.1)).require_smooth()


def test_objective_matrix_read_only(rng):
    Y = rng.standard_normal((3, 4))
    obj = Objective(Y, l1())
    with pytest.raises(ValueError):
        obj.Y[0, 0] = 5.0


# ------------------------------------------------------------------ hypothesis


@settings(deadline=None, max_examples=60)
@given(
    st.lists(st.floats(-50, 50), min_size=1, max_size=12),
    st.floats(1e-3, 1.0),
)
def test_smoothing_gap_bounds(zs, mu):
    # huber and pseudo-huber majorize l1 with gap <= mu/2 resp. mu per entry;
    # logcosh minorizes l1 with gap <= mu log 2 per entry.
    z = np.array(zs)
    o = np.abs(z).sum()
    slack = 1e-9 * max(1.0, o)
    hv = loss_value(huber(mu), z)
    assert o - slack <= hv <= o + z.size * mu / 2 + slack
    pv = loss_value(pseudo_huber(mu), z)
    assert o - slack <= pv <= o + z.size * mu + slack
    lv = loss_value(logcosh(mu), z)
    assert lv - slack <= o <= lv + z.size * mu * np.log(2.0) + slack


@settings(deadline=None, max_examples=60)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=12), st.floats(1e-3, 1.0))
def test_grad_bounded_by_one(zs, mu):
    z = np.array(zs)
    for spec in (l1(), huber(mu), pseudo_huber(mu), logcosh(mu)):
        assert np.abs(loss_grad(spec, z)).max() <= 1.0 + 1e-12
