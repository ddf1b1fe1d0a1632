import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hsharp.errors import DivergenceError, DomainError
from hsharp.heisenberg import GroupPoint, HeisenbergContext
from hsharp.kernels import (
    IntegrationConfig,
    ball_indicator,
    pointwise_function,
    power_function,
    radial_function,
    zero_function,
)
from hsharp.measures import BallSpec, power_weight, unit_weight, weight_measure
from hsharp.spaces import (
    BallSearchConfig,
    MorreyParams,
    dilate_function,
    dilation_scaling_check,
    lp_norm,
    morrey_ball_quantity,
    morrey_two_weight_norm,
    morrey_weighted_norm,
    weak_lp_norm,
    weak_morrey_weighted_norm,
)

H1 = HeisenbergContext(1)
OMEGA = math.pi**2
UNIT_BALL = BallSearchConfig(radius_range=(1.0, 1.0), radius_count=1, centered_only=True)


def test_lp_examples():
    assert lp_norm(ball_indicator(1.0), 2, H1).value == pytest.approx(math.pi, rel=1e-12)
    assert lp_norm(zero_function(), 2, H1).value == 0.0
    # |x|^{-Q/2 - 1} on |x| >= 1: (omega / 2)^{1/2}
    f = power_function(-3.0, 1.0)
    assert lp_norm(f, 2, H1).value == pytest.approx(math.sqrt(2) * math.pi, rel=1e-11)


def test_lp_weighted_closed_form():
    # int_{B_1} |x|^a = omega / (Q + a)
    for a in (-2.0, 0.5, 3.0):
        v = lp_norm(ball_indicator(1.0), 1, H1, a).value
        assert v == pytest.approx(4 * OMEGA / (4 + a), rel=1e-12)


def test_lp_divergence_detected():
    with pytest.raises(DivergenceError):
        lp_norm(power_function(-2.0), 2, H1)
    with pytest.raises(DivergenceError):
        lp_norm(ball_indicator(1.0), 1, H1, -4.0)


def test_lp_on_off_center_ball_by_sampling():
    ball = BallSpec(GroupPoint([2.0, 0.0, 0.0], H1), 0.5)
    nv = lp_norm(radial_function(lambda r: np.ones_like(r)), 1, H1, None, ball)
    assert abs(nv.value - ball.volume) <= 1e-12 * ball.volume + nv.error


def test_weight_measure_closed_form_vs_sampling():
    ball = BallSpec.centered(H1, 2.0)
    exact = weight_measure(power_weight(1.0), ball)
    shifted = BallSpec(GroupPoint([1e-9, 0.0, 0.0], H1), 2.0)
    mc = weight_measure(power_weight(1.0), shifted, samples=1 << 18)
    assert abs(mc.value - exact.value) <= mc.error
    assert exact.value == pytest.approx(4 * OMEGA * 2.0**5 / 5, rel=1e-14)


def test_weak_examples():
    assert weak_lp_norm(ball_indicator(1.0), 1, H1).value == pytest.approx(OMEGA, rel=1e-9)
    assert weak_lp_norm(zero_function(), 1, H1).value == 0.0


def test_weak_power_closed_form():
    # f = |x|^-2 on B_1, p = 2: lam * |{f >= lam}|^{1/2} = lam * (Omega lam^-2)^{1/2} for lam >= 1
    f = power_function(-2.0, 0.0, 1.0)
    assert weak_lp_norm(f, 2, H1).value == pytest.approx(math.pi, rel=1e-6)


@given(st.floats(0.3, 3.0), st.floats(1.0, 4.0), st.floats(0.2, 3.0))
def test_weak_below_strong(scale, p, width):
    f = radial_function(lambda r: scale * np.exp(-r / width), support=(0.0, 5.0))
    assert weak_lp_norm(f, p, H1).value <= lp_norm(f, p, H1).value * (1 + 1e-9)


def test_weak_sampled_agrees_with_exact():
    f = radial_function(lambda r: 1.0 / (1 + r * r), support=(0.0, 3.0))
    ball = BallSpec.centered(H1, 3.0)
    exact = weak_lp_norm(f, 2, H1, None, ball)
    g = pointwise_function(lambda x: 1.0 / (1 + ((x[:, 0] ** 2 + x[:, 1] ** 2) ** 2 + x[:, 2] ** 2) ** 0.5))
    sampled = weak_lp_norm(g, 2, H1, None, ball, IntegrationConfig(mc_samples=1 << 17))
    assert abs(sampled.value - exact.value) <= sampled.error + 2e-3 * exact.value


def test_morrey_single_ball_examples():
    # {B(0,1)}, chi_B1, alpha = gamma = 0: Omega^{-lam}
    for q, lam in ((2.0, -0.25), (4.0, -0.1)):
        v = morrey_two_weight_norm(ball_indicator(1.0), H1, MorreyParams(q, lam), UNIT_BALL).value
        assert v == pytest.approx(OMEGA**-lam, rel=1e-12)
    kappa, p = 0.5, 2.0
    v = morrey_weighted_norm(ball_indicator(1.0), H1, p, kappa, None, UNIT_BALL).value
    assert v == pytest.approx(OMEGA ** ((1 - kappa) / p), rel=1e-12)
    assert morrey_weighted_norm(zero_function(), H1, 2, 0.5).value == 0.0


def test_morrey_monotone_in_family():
    f = radial_function(lambda r: np.exp(-r), support=(0.0, 10.0))
    small = BallSearchConfig(radius_count=3, center_count=2, mc_samples=1 << 12)
    big = small.refined()
    a = morrey_weighted_norm(f, H1, 2, 0.5, None, small).value
    b = morrey_weighted_norm(f, H1, 2, 0.5, None, big).value
    # the refined grid contains the coarse one, and shares its random streams only on centered balls
    assert b >= a * (1 - 1e-2)
    assert len(big.balls(H1)) > len(small.balls(H1))


def test_morrey_reports_argmax():
    f = ball_indicator(1.0)
    search = BallSearchConfig(centered_only=True)
    rep = morrey_two_weight_norm(f, H1, MorreyParams(2.0, -0.25), search)
    assert rep.argmax.is_centered
    # per-ball quantity on B(0,R) is (Omega R^4)^{-1/4} Omega^{1/2} min(R,1)^2, maximal at R = 1
    assert rep.argmax.radius == pytest.approx(1.0)
    assert len(rep.per_ball) == search.radius_count


def test_weak_morrey_centered():
    v = weak_morrey_weighted_norm(ball_indicator(1.0), H1, 1.0, 0.5, None, UNIT_BALL).value
    assert v == pytest.approx(OMEGA**0.5, rel=1e-9)


def test_params_validated():
    with pytest.raises(DomainError):
        MorreyParams(2.0, -0.6)
    with pytest.raises(DomainError):
        MorreyParams(2.0, 0.0)
    with pytest.raises(DomainError):
        MorreyParams(2.0, -0.25, kappa=1.0)


def test_dilation_examples():
    f = ball_indicator(1.0)
    lhs, rhs = dilation_scaling_check(f, H1, 1.0, 2.0)
    assert lhs == rhs
    lhs, rhs = dilation_scaling_check(f, H1, 2.0, 2.0)
    assert lhs == pytest.approx(math.pi / 4, rel=1e-12)
    assert rhs == pytest.approx(math.pi / 4, rel=1e-12)


def test_dilate_function_pointwise():
    f = pointwise_function(lambda x: x[:, 0] + x[:, 2])
    g = dilate_function(f, 3.0)
    x = np.array([[1.0, 2.0, 0.5]])
    assert g.at_points(x, 1)[0] == pytest.approx(3.0 + 9.0 * 0.5)


profiles = st.sampled_from(
    [
        lambda r: np.exp(-r),
        lambda r: 1.0 / (1 + r**6),
        lambda r: np.exp(-r * r) * (1 + r),
    ]
)


# a < 6p - Q keeps every profile in L^p(|x|^a)
@given(profiles, st.floats(0.1, 10.0), st.floats(1.0, 5.0), st.floats(-2.0, 1.5))
def test_lp_dilation_identity(prof, t, p, a):
    f = radial_function(prof, powers=(0.0, None))
    lhs, rhs = dilation_scaling_check(f, H1, t, p, a)
    assert lhs == pytest.approx(rhs, rel=1e-8)


@given(
    st.floats(-3.0, 1.0),
    st.floats(0.2, 5.0),
    st.floats(0.1, 10.0),
    st.floats(1.5, 4.0),
    st.floats(0.05, 0.95),
    st.floats(-1.0, 2.0),
    st.floats(-1.0, 1.0),
)
def test_morrey_per_ball_scaling(a, R, t, q, lam_frac, alpha, gamma):
    lam = -lam_frac / q
    f = power_function(a)
    mp = MorreyParams(q, lam, alpha, gamma)
    lhs, rhs = dilation_scaling_check(f, H1, t, q, morrey=mp, ball=BallSpec.centered(H1, R))
    if a * q + gamma + 4 <= 0 or alpha + 4 <= 0:
        return
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_extremal_power_is_dilation_invariant():
    # per-ball quantity of |x|^{e} with e the ball exponent does not depend on R
    mp = MorreyParams(2.0, -0.3, 0.5, 0.2)
    e = mp.ball_exponent(4)
    f = power_function(e)
    vals = [
        morrey_ball_quantity(f, H1, BallSpec.centered(H1, R), mp.q, power_weight(mp.alpha), power_weight(mp.gamma), mp.lam + 1 / mp.q)[0]
        for R in (0.01, 1.0, 50.0)
    ]
    assert np.allclose(vals, vals[0], rtol=1e-10)


def test_holder_consistency():
    rng = np.random.default_rng(11)
    for _ in range(10):
        p1, p2 = rng.uniform(1.5, 5.0, size=2)
        p = 1 / (1 / p1 + 1 / p2)
        c1, c2 = rng.uniform(0.2, 2.0, size=2)
        f1 = radial_function(lambda r, c=c1: np.exp(-c * r), support=(0.0, 20.0))
        f2 = radial_function(lambda r, c=c2: 1 / (1 + c * r**2), support=(0.0, 20.0))
        prod = radial_function(lambda r: f1.profile(r) * f2.profile(r), support=(0.0, 20.0))
        assert lp_norm(prod, p, H1).value <= lp_norm(f1, p1, H1).value * lp_norm(f2, p2, H1).value * (1 + 1e-10)


def test_unit_weight_defaults():
    f = ball_indicator(2.0)
    assert lp_norm(f, 2, H1, unit_weight()).value == lp_norm(f, 2, H1).value
