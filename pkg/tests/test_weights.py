import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hsharp.errors import DivergenceError, DomainError
from hsharp.heisenberg import GroupPoint, HeisenbergContext
from hsharp.kernels import (
    MultilinearKernel,
    ball_indicator,
    hardy_kernel,
    hilbert_kernel,
    hlp_kernel,
    zero_function,
)
from hsharp.measures import BallSpec, power_weight, product_weight, tabulated_weight, unit_weight
from hsharp.spaces import BallSearchConfig
from hsharp.weights import (
    VectorWeight,
    ap_characteristic,
    cz_size_condition_check,
    doubling_check,
    indicator_family,
    morrey_boundedness_experiment,
    multiweight_product_check,
    reverse_holder_check,
    rh_measure_comparison,
    vector_ap_characteristic,
    vector_ap_factorization_check,
)

H1 = HeisenbergContext(1)
Q = 4
CENTERED = [BallSpec.centered(H1, r) for r in (1e-3, 0.1, 1.0, 10.0, 1e3)]
MIXED = BallSearchConfig(radius_count=4, center_count=3).balls(H1)


def avg_power(a):
    # average of |x|^a over a centered unit ball
    return Q / (Q + a)


def test_unit_weight_is_one_everywhere():
    for p in (1.0, 2.0, 5.0):
        assert ap_characteristic(unit_weight(), p, MIXED).value == pytest.approx(1.0)
    assert reverse_holder_check(unit_weight(), 3.0, MIXED).value == pytest.approx(1.0)
    vw = VectorWeight([unit_weight(), unit_weight()], [2.0, 6.0])
    assert vector_ap_characteristic(vw, MIXED).value == pytest.approx(1.0)
    assert multiweight_product_check(vw, MIXED).value == pytest.approx(1.0)


def test_ap_of_linear_weight_on_centered_balls():
    rep = ap_characteristic(power_weight(1.0), 2.0, CENTERED)
    assert rep.value == pytest.approx(16 / 15, rel=1e-12)
    for _, v in rep.per_ball:
        assert v == pytest.approx(16 / 15, rel=1e-12)
    assert rep.argmax in CENTERED


def test_a1_branch():
    # |x|^-1 on a centered ball: avg = Q/(Q-1) R^-1, ess inf = R^-1
    rep = ap_characteristic(power_weight(-1.0), 1.0, CENTERED)
    assert rep.value == pytest.approx(4 / 3, rel=1e-12)
    # positive powers vanish at the center, so A_1 fails
    rep = ap_characteristic(power_weight(1.0), 1.0, CENTERED, on_divergence="flag")
    assert rep.unbounded


def test_a1_sampled_uses_low_quantile():
    ball = BallSpec(GroupPoint([3.0, 0.0, 0.0], H1), 0.5)
    w = tabulated_weight(lambda x: 1.0 + x[:, 0] ** 2)
    rep = ap_characteristic(w, 1.0, [ball])
    assert 1.0 < rep.value < 2.0


def test_out_of_window_weight():
    w = power_weight(5.0)
    with pytest.raises(DivergenceError):
        ap_characteristic(w, 2.0, CENTERED)
    rep = ap_characteristic(w, 2.0, CENTERED, on_divergence="flag")
    assert rep.unbounded and math.isinf(rep.value)
    g = np.asarray(rep.growth)
    assert np.all(np.diff(g) > 0) and g[-1] > 1e4 * g[0]
    # closed form with the origin cut out at eps = R/10
    assert g[0] == pytest.approx(4 / 9 * (1 - 0.1**9) * 4 * (0.1**-1 - 1), rel=1e-12)


@given(st.floats(-3.9, 3.9), st.floats(1.05, 4.0))
def test_power_window(a, p):
    w = power_weight(a)
    inside = -Q < a < Q * (p - 1)
    rep = ap_characteristic(w, p, CENTERED, on_divergence="flag")
    if inside:
        vals = [v for _, v in rep.per_ball]
        assert not rep.unbounded
        assert np.allclose(vals, vals[0], rtol=1e-12)
        dual = -a / (p - 1)
        assert rep.value == pytest.approx(avg_power(a) * avg_power(dual) ** (p - 1), rel=1e-12)
    else:
        assert rep.unbounded


@given(st.floats(-2.0, 2.0))
def test_ap_nonincreasing_in_p(a):
    w = power_weight(a)
    vals = []
    for p in (2.0, 3.0, 5.0):
        vals.append(ap_characteristic(w, p, CENTERED).value)
    assert vals[0] >= vals[1] * (1 - 1e-12) and vals[1] >= vals[2] * (1 - 1e-12)


def test_ap_monotone_in_p_on_sampled_balls():
    w = power_weight(0.7)
    a = ap_characteristic(w, 2.0, MIXED).value
    b = ap_characteristic(w, 3.0, MIXED).value
    assert b <= a * (1 + 1e-2)


def test_reverse_holder_oracle():
    rep = reverse_holder_check(power_weight(1.0), 2.0, CENTERED)
    assert rep.value == pytest.approx((4 / 6) ** 0.5 * 5 / 4, rel=1e-12)
    with pytest.raises(DomainError):
        reverse_holder_check(power_weight(1.0), 1.0, CENTERED)


@given(st.floats(-3.0, 3.0), st.floats(1.1, 4.0))
def test_reverse_holder_at_least_one(a, r):
    if Q + a * r <= 0:
        return
    assert reverse_holder_check(power_weight(a), r, CENTERED).value >= 1.0 - 1e-12


def test_rh_measure_comparison():
    w = power_weight(1.0)
    pairs = [(BallSpec.centered(H1, s * R), BallSpec.centered(H1, R)) for R in (0.5, 2.0) for s in (0.1, 0.5, 0.9)]
    rep = rh_measure_comparison(w, 2.0, pairs)
    assert rep.value <= 1.0 + 1e-12


def test_doubling_oracle():
    rep = doubling_check(power_weight(1.0), 2.0, [2.0], CENTERED)
    assert rep.value == pytest.approx(2**5 / 2**8, rel=1e-12)
    for _, v in rep.per_ball:
        assert v == pytest.approx(2**5 / 2**8, rel=1e-12)
    assert doubling_check(unit_weight(), 1.5, [2.0, 3.0], MIXED).value <= 1.0 + 1e-9
    with pytest.raises(DomainError):
        doubling_check(unit_weight(), 2.0, [1.0], CENTERED)


@given(st.floats(-3.5, 3.0), st.floats(1.0, 3.0), st.floats(1.1, 8.0))
def test_doubling_power_weights_match_closed_form(a, p, lam):
    rep = doubling_check(power_weight(a), p, [lam], CENTERED)
    closed = lam ** (Q + a) / lam ** (Q * p)
    assert rep.value <= closed * (1 + 1e-9)


def test_vector_weight_nu_invariant():
    w1 = tabulated_weight(lambda x: 1.0 + np.abs(x[:, 0]))
    w2 = power_weight(0.5)
    vw = VectorWeight([w1, w2], [3.0, 6.0])
    rng = np.random.default_rng(4)
    x = rng.normal(size=(10000, 3)) * 3
    want = w1.at_points(x, 1) ** (vw.p / 3.0) * w2.at_points(x, 1) ** (vw.p / 6.0)
    assert np.allclose(vw.nu.at_points(x, 1), want, rtol=1e-12)


def test_vector_ap_closed_form():
    w = power_weight(1.0)
    vw = VectorWeight([w, w], [4.0, 4.0])
    # nu = |x|^1, p = 2; dual exponent 1 - p_i' = -1/3
    want = avg_power(1.0) ** 0.5 * avg_power(-1.0 / 3.0) ** 1.5
    assert want == pytest.approx((4 / 5) ** 0.5 * (12 / 11) ** 1.5)
    assert vector_ap_characteristic(vw, CENTERED).value == pytest.approx(want, rel=1e-12)


def test_vector_factorization_consistency():
    w = power_weight(1.0)
    rep = vector_ap_factorization_check(VectorWeight([w, w], [4.0, 4.0]), MIXED)
    assert rep["vector_finite"] and rep["scalars_finite"] and rep["consistent"]
    # the dual |x|^{-13/3} of |x|^13 is not integrable at the origin
    bad = power_weight(13.0)
    rep = vector_ap_factorization_check(VectorWeight([bad, w], [4.0, 4.0]), CENTERED)
    assert not rep["vector_finite"] and not rep["scalars_finite"] and rep["consistent"]


@given(st.floats(-3.0, 3.0), st.floats(1.1, 6.0), st.floats(1.1, 6.0))
def test_equal_weights_jensen(a, p1, p2):
    w = power_weight(a)
    rep = multiweight_product_check(VectorWeight([w, w], [p1, p2]), CENTERED)
    assert rep.value <= 1.0 + 1e-9


def test_multiweight_power_closed_form():
    w1, w2 = power_weight(1.0), power_weight(-1.0)
    vw = VectorWeight([w1, w2], [4.0, 2.0])
    p = vw.p
    want = avg_power(1.0) ** (p / 4) * avg_power(-1.0) ** (p / 2) / avg_power(p / 4 - p / 2)
    assert multiweight_product_check(vw, CENTERED).value == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("make", [hardy_kernel, hilbert_kernel, hlp_kernel])
def test_size_condition_built_ins(make):
    rep = cz_size_condition_check(make(H1, 2), samples=5000)
    assert math.isfinite(rep.value) and rep.value > 0
    assert not rep.growing
    assert rep.exponent == 8.0


def test_size_condition_wrong_exponent_grows():
    rep = cz_size_condition_check(hardy_kernel(H1, 2), samples=5000, exponent=2.0)
    assert rep.growing


def test_size_condition_zero_kernel():
    k = MultilinearKernel(H1, 1, lambda x, ys: np.zeros(x.shape[0]), -4.0, name="zero")
    assert cz_size_condition_check(k, samples=1000).value == 0.0


def test_hardy_size_constant_bounded_by_theory():
    # on the support |y_j^-1 x| <= 2|x|, so A <= (2m)^{mQ} / Omega^m
    rep = cz_size_condition_check(hardy_kernel(H1, 1), samples=20000)
    assert rep.value <= 2.0**4 / math.pi**2 * (1 + 1e-12)


def test_experiment_zero_family():
    vw = VectorWeight([unit_weight(), unit_weight()], [4.0, 4.0])
    rep = morrey_boundedness_experiment(hardy_kernel(H1, 2), vw, 0.5, family=[[zero_function(), ball_indicator(1.0)]])
    assert rep.value == 0.0 and rep.stable


def test_experiment_small_family():
    vw = VectorWeight([unit_weight(), unit_weight()], [4.0, 4.0])
    fam = indicator_family(H1, 2, members=3)
    search = BallSearchConfig(radius_count=4, center_count=2, mc_samples=1 << 11)
    rep = morrey_boundedness_experiment(hardy_kernel(H1, 2), vw, 0.5, family=fam, search=search)
    assert 0.0 < rep.value < math.inf
    assert len(rep.per_member) == 3


def test_product_weight_stays_power():
    w = product_weight([power_weight(1.0), power_weight(2.0)], [0.5, 0.25])
    assert w.power == pytest.approx(1.0)
