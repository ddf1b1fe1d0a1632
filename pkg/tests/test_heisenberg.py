import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hsharp.errors import DimensionError, DomainError, DivergenceError
from hsharp.heisenberg import (
    GroupPoint,
    HeisenbergContext,
    ball_volume,
    dilate,
    distance,
    e1,
    group_inv,
    group_mul,
    hnorm,
    integrate_radial,
    origin,
    sample_ball,
    sample_sphere,
    hnorm_array,
)
from hsharp.rng import generator

H1 = HeisenbergContext(1)
coord = st.floats(-5.0, 5.0, allow_nan=False)


def pt(ctx, *c):
    return GroupPoint(c, ctx)


def points(ctx):
    return st.lists(coord, min_size=ctx.dim, max_size=ctx.dim).map(lambda c: GroupPoint(c, ctx))


def test_context_numbers():
    assert H1.Q == 4
    assert H1.omega_big == pytest.approx(math.pi**2, rel=1e-14)
    assert H1.omega_small == pytest.approx(4 * math.pi**2, rel=1e-14)
    assert HeisenbergContext(2).Q == 6


def test_group_law_examples():
    assert group_mul(pt(H1, 1, 0, 0), origin(H1)) == pt(H1, 1, 0, 0)
    assert np.allclose(group_mul(pt(H1, 1, 0, 0), pt(H1, 0, 1, 0)).coords, [1, 1, -2])
    assert np.allclose(group_mul(pt(H1, 0, 1, 0), pt(H1, 1, 0, 0)).coords, [1, 1, 2])


def test_inverse_and_norm_examples():
    assert np.allclose(group_inv(pt(H1, 1, 2, 3)).coords, [-1, -2, -3])
    assert group_inv(origin(H1)) == origin(H1)
    assert hnorm(e1(H1)) == 1.0
    assert hnorm(pt(H1, 0, 0, 4)) == pytest.approx(2.0)
    assert hnorm(pt(H1, 1, 1, 0)) == pytest.approx(math.sqrt(2))


def test_dilation_examples():
    x = pt(H1, 1, 1, 1)
    assert dilate(1.0, x) == x
    assert np.allclose(dilate(2.0, x).coords, [2, 2, 4])
    assert hnorm(dilate(3.0, pt(H1, 1, 1, 0))) == pytest.approx(3 * math.sqrt(2))
    with pytest.raises(DomainError):
        dilate(0.0, x)


def test_mixed_contexts_rejected():
    with pytest.raises(DimensionError):
        group_mul(e1(H1), e1(HeisenbergContext(2)))
    with pytest.raises(DimensionError):
        GroupPoint([1.0, 2.0], H1)


def test_ball_volume():
    assert ball_volume(H1, 1.0) == pytest.approx(math.pi**2, rel=1e-14)
    for n in (1, 2, 3):
        ctx = HeisenbergContext(n)
        assert ball_volume(ctx, 2.0) / ball_volume(ctx, 1.0) == pytest.approx(2.0**ctx.Q)


@pytest.mark.parametrize("n", [1, 2])
def test_volume_matches_sampling(n):
    # unit-ball Lebesgue volume by rejection sampling, times the Haar density
    ctx = HeisenbergContext(n)
    rng = generator(1, 99)
    x = rng.uniform(-1, 1, size=(400000, ctx.dim))
    frac = np.mean(hnorm_array(x, n) < 1.0)
    leb = frac * 2.0**ctx.dim
    se = math.sqrt(frac * (1 - frac) / x.shape[0]) * 2.0**ctx.dim
    assert abs(leb * ctx.haar_density - ctx.omega_big) <= 4 * se * ctx.haar_density


@given(points(H1), points(H1), points(H1))
def test_associativity(x, y, z):
    a = group_mul(group_mul(x, y), z).coords
    b = group_mul(x, group_mul(y, z)).coords
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12 * (1 + np.abs(a).max()))


@given(points(H1), st.floats(1e-3, 1e3))
def test_norm_homogeneity(x, r):
    assert hnorm(dilate(r, x)) == pytest.approx(r * hnorm(x), rel=1e-12, abs=1e-300)


@given(points(H1), points(H1), points(H1))
def test_triangle_inequality(p, q, x):
    assert distance(p, q) <= distance(p, x) + distance(x, q) + 1e-12 * (1 + distance(p, q))


@given(points(H1), points(H1), points(H1))
def test_left_invariance(a, p, q):
    d = distance(p, q)
    assert distance(group_mul(a, p), group_mul(a, q)) == pytest.approx(d, rel=1e-9, abs=1e-9)


@given(points(HeisenbergContext(2)))
def test_inverse_cancels(x):
    assert np.allclose(group_mul(x, group_inv(x)).coords, 0.0, atol=1e-12)


def test_distance_examples():
    x = pt(H1, 0.3, -1, 2)
    assert distance(x, x) == 0.0
    assert distance(e1(H1), origin(H1)) == 1.0


def test_integrate_radial_examples():
    r = integrate_radial(H1, lambda r: np.ones_like(r), 0.0, 1.0, vectorized=True)
    assert r.value == pytest.approx(math.pi**2, rel=1e-12)
    r = integrate_radial(H1, lambda r: r ** (-2.0), 0.0, 1.0, powers=(-2.0, None), vectorized=True)
    assert r.value == pytest.approx(2 * math.pi**2, rel=1e-12)
    assert integrate_radial(H1, lambda r: 0.0 * r, 0.0, math.inf, vectorized=True).value == 0.0
    r = integrate_radial(H1, lambda r: np.exp(-r), 0.0, math.inf, vectorized=True)
    assert r.value == pytest.approx(4 * math.pi**2 * 6.0, rel=1e-11)


def test_integrate_radial_divergence():
    with pytest.raises(DivergenceError):
        integrate_radial(H1, lambda r: r ** (-4.0), 1.0, math.inf, vectorized=True)
    with pytest.raises(DivergenceError):
        integrate_radial(H1, lambda r: r ** (-4.5), 0.0, 1.0, vectorized=True)


@given(st.floats(0.05, 20.0), st.floats(0.1, 3.0))
def test_haar_scaling_of_indicators(rho, R):
    # |delta_rho(B_R)| = rho^Q |B_R| through the radial quadrature
    prof = lambda r: (r < rho * R).astype(float)
    v = integrate_radial(H1, prof, 0.0, math.inf, breakpoints=[rho * R], vectorized=True).value
    assert v == pytest.approx(rho**4 * ball_volume(H1, R), rel=1e-10)


def test_scalar_profiles_work():
    v = integrate_radial(H1, lambda r: math.exp(-r * r), 0.0, math.inf).value
    # omega * int r^3 e^{-r^2} dr = omega / 2
    assert v == pytest.approx(2 * math.pi**2, rel=1e-11)


def test_sphere_samples_are_on_the_sphere_and_antithetic():
    xi = sample_sphere(H1, 1000, generator(3))
    assert np.allclose(hnorm_array(xi, 1), 1.0)
    assert np.allclose(xi[0::2], -xi[1::2])


def test_sample_ball_lies_in_ball():
    c = np.array([1.0, -0.5, 2.0])
    y = sample_ball(H1, c, 0.7, 2000, generator(5))
    d = hnorm_array(np.array([*map(lambda v: group_mul(group_inv(GroupPoint(c, H1)), GroupPoint(v, H1)).coords, y)]), 1)
    assert d.max() < 0.7
