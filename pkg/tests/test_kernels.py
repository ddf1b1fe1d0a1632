import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hsharp.errors import DimensionError, SingularPointError
from hsharp.heisenberg import GroupPoint, HeisenbergContext, dilate, e1, origin
from hsharp.kernels import (
    IntegrationConfig,
    annulus_indicator,
    apply_operator,
    ball_indicator,
    hardy_kernel,
    hilbert_kernel,
    hlp_kernel,
    operator_profile,
    pointwise_function,
    power_function,
    radial_function,
    radialize,
    reduced_radial_integral,
    sampled_profile,
    zero_function,
)
from hsharp.spaces import lp_norm
from hsharp.special import ImParams, i_m_closed

H1 = HeisenbergContext(1)
OMEGA = math.pi**2


def at_radius(ctx, r):
    return dilate(r, e1(ctx))


def test_hilbert_examples():
    k1 = hilbert_kernel(H1, 1)
    assert k1(e1(H1), origin(H1)) == 1.0
    k2 = hilbert_kernel(H1, 2)
    assert k2(e1(H1), e1(H1), e1(H1)) == pytest.approx(1 / 9)
    x = GroupPoint([0.3, -0.2, 0.5], H1)
    y = GroupPoint([1.0, 0.4, -0.1], H1)
    assert k1(dilate(2, x), dilate(2, y)) == pytest.approx(2.0**-4 * k1(x, y), rel=1e-13)


def test_hlp_examples():
    k1 = hlp_kernel(H1, 1)
    assert k1(e1(H1), at_radius(H1, 0.7)) == 1.0
    k2 = hlp_kernel(H1, 2)
    assert k2(e1(H1), at_radius(H1, 2.0), at_radius(H1, 1.0)) == pytest.approx(2.0**-8)


def test_hardy_examples():
    k1 = hardy_kernel(H1, 1)
    assert k1(e1(H1), at_radius(H1, 0.5)) == pytest.approx(1 / OMEGA)
    assert k1(e1(H1), at_radius(H1, 2.0)) == 0.0
    k2 = hardy_kernel(H1, 2)
    x, y1, y2 = at_radius(H1, 1.3), at_radius(H1, 0.4), GroupPoint([0.2, 0.1, 0.3], H1)
    assert k2(x, y1, y2) == pytest.approx(k1(x, y1) * k1(x, y2), rel=1e-14)


def test_arity_checked():
    with pytest.raises(DimensionError):
        hilbert_kernel(H1, 2)(e1(H1), e1(H1))
    with pytest.raises(DimensionError):
        apply_operator(hardy_kernel(H1, 2), [ball_indicator(1.0)], e1(H1))


@pytest.mark.parametrize("make", [hilbert_kernel, hlp_kernel, hardy_kernel])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_kernel_invariants(make, m):
    k = make(HeisenbergContext(1 + m % 2), m)
    rep = k.check_invariants(samples=512)
    assert rep["min_value"] >= 0.0
    assert rep["degree_spread"] <= 1e-9
    assert rep["measured_degree"] == pytest.approx(-k.ctx.Q * m)
    assert rep["radial_mismatch"] <= 1e-12


def test_hlp_permutation_symmetry():
    k = hlp_kernel(H1, 3)
    rng = np.random.default_rng(0)
    x = rng.normal(size=(200, 3))
    ys = [rng.normal(size=(200, 3)) for _ in range(3)]
    a = k.evaluate(x, ys)
    b = k.evaluate(x, [ys[2], ys[0], ys[1]])
    assert np.array_equal(a, b)


def test_hardy_apply_examples():
    k = hardy_kernel(H1, 1)
    f = ball_indicator(1.0)
    for r in (0.3, 1.0):
        assert apply_operator(k, [f], at_radius(H1, r)).value == pytest.approx(1.0, rel=1e-12)
    assert apply_operator(k, [f], at_radius(H1, 2.0)).value == pytest.approx(2.0**-4, rel=1e-12)
    assert apply_operator(hilbert_kernel(H1, 2), [f, zero_function()], e1(H1)).value == 0.0
    with pytest.raises(SingularPointError):
        apply_operator(k, [f], origin(H1))


def test_hilbert_reduction_matches_im():
    # H(|.|^s_1, ..., |.|^s_m)(e_1) for the Hilbert kernel is Omega^m I_m(m; -s_j/Q)
    for m, ps in ((1, [2.0]), (2, [4.0, 4.0]), (2, [3.0, 6.0])):
        k = hilbert_kernel(H1, m)
        fs = [power_function(-4.0 / p) for p in ps]
        got = reduced_radial_integral(k, fs, 1.0)
        ref = OMEGA**m * i_m_closed(ImParams(m, [1 / p for p in ps]))
        assert got.value == pytest.approx(ref, rel=1e-10)
        assert got.error <= 1e-8 * ref


def test_monte_carlo_path_agrees_with_quadrature():
    k = hilbert_kernel(H1, 2)
    fs = [power_function(-1.0), power_function(-1.0)]
    cfg = IntegrationConfig()
    q = reduced_radial_integral(k, fs, 1.0, cfg.with_(method="quadrature"))
    mc = reduced_radial_integral(k, fs, 1.0, cfg.with_(method="monte-carlo"))
    assert abs(mc.value - q.value) <= mc.error
    assert mc.error < 1e-2 * q.value


def test_pointwise_monte_carlo_agrees_with_reduction():
    # a radial function disguised as a pointwise one forces the polar sampler
    k = hardy_kernel(H1, 1)
    g = radial_function(lambda r: np.exp(-r), label="exp(-r)")
    disguised = pointwise_function(lambda x: np.exp(-((x[:, 0] ** 2 + x[:, 1] ** 2) ** 2 + x[:, 2] ** 2) ** 0.25))
    x = at_radius(H1, 1.5)
    exact = apply_operator(k, [g], x)
    mc = apply_operator(k, [disguised], x, IntegrationConfig(mc_samples=1 << 16))
    assert abs(mc.value - exact.value) <= mc.error + 1e-12


def test_operator_power_law_exponent():
    # Hardy applied to |y|^a on the unit ball is (Q/(Q+a)) |x|^a inside, |x|^-Q Q/(Q+a) outside
    k = hardy_kernel(H1, 1)
    a = 1.5
    f = power_function(a, 0.0, 1.0)
    radii = np.array([0.2, 0.5, 0.9])
    vals, _ = operator_profile(k, [f], radii)
    slope = np.polyfit(np.log(radii), np.log(vals), 1)[0]
    assert slope == pytest.approx(a, abs=1e-10)
    assert vals[1] == pytest.approx(4 / 5.5 * 0.5**a, rel=1e-12)
    out, _ = operator_profile(k, [f], np.array([2.0, 4.0]))
    assert out[0] / out[1] == pytest.approx(2.0**4, rel=1e-12)


def test_radialize_examples():
    f = radial_function(lambda r: r**2)
    assert radialize(f, H1) is f
    odd = pointwise_function(lambda x: x[:, 0])
    g = radialize(odd, H1)
    assert np.allclose(g.profile(np.array([0.5, 1.0, 3.0])), 0.0, atol=1e-12)
    mixed = pointwise_function(lambda x: ((x[:, 0] ** 2 + x[:, 1] ** 2) ** 2 + x[:, 2] ** 2) ** 0.5 + x[:, 0])
    g = radialize(mixed, H1)
    r = np.array([0.5, 1.0, 2.0])
    assert np.allclose(g.profile(r), r**2, rtol=1e-12)


def test_radialization_commutes_with_operator():
    k = hilbert_kernel(H1, 1)
    f = pointwise_function(
        lambda x: np.exp(-(x[:, 0] - 0.3) ** 2 - x[:, 1] ** 2 - np.abs(x[:, 2])), support=(0.0, 4.0)
    )
    g = radialize(f, H1)
    x = at_radius(H1, 1.2)
    cfg = IntegrationConfig(mc_samples=1 << 17)
    direct = apply_operator(k, [f], x, cfg)
    via_g = apply_operator(k, [g], x, cfg)
    assert abs(direct.value - via_g.value) <= direct.error + via_g.error + 0.02 * via_g.value


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_radialization_does_not_increase_norm(p):
    f = pointwise_function(
        lambda x: np.exp(-(x[:, 0] - 0.5) ** 2) * (1 + x[:, 2] ** 2) ** -1, support=(0.0, 2.0)
    )
    g = radialize(f, H1)
    nf = lp_norm(f, p, H1, cfg=IntegrationConfig(mc_samples=1 << 16))
    ng = lp_norm(g, p, H1)
    assert ng.value <= nf.value + nf.error


def test_sampled_profile_interpolates_in_log_radius():
    f = sampled_profile([1.0, 10.0], [0.0, 1.0])
    assert f.profile(np.array([math.sqrt(10.0)]))[0] == pytest.approx(0.5)
    assert f.profile(np.array([20.0]))[0] == 0.0


@given(st.floats(0.1, 10.0), st.floats(1.1, 10.0))
def test_annulus_operator_value(r1, ratio):
    # Hardy of an annulus indicator at a point outside it: |A| / (Omega |x|^Q)
    r2 = r1 * ratio
    x = 2 * r2
    v = apply_operator(hardy_kernel(H1, 1), [annulus_indicator(r1, r2)], at_radius(H1, x)).value
    assert v == pytest.approx((r2**4 - r1**4) / x**4, rel=1e-10)
