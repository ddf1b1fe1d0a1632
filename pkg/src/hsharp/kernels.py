"""Multilinear kernels, test functions and operator evaluation.

An operator with nonnegative kernel ``K`` acts as

    H(f_1..f_m)(x) = int K(x, y_1..y_m) f_1(y_1) ... f_m(y_m) dy_1 ... dy_m.

For kernels that depend only on the gauge norms of their arguments and
radial inputs, the integral is reduced exactly to an m-dimensional integral
over radii (each ``dy_j`` contributes ``omega_Q r_j^(Q-1) dr_j``) and
evaluated by nested Gauss-Legendre quadrature in ``log r``.  Everything else
goes through stratified Monte Carlo in polar coordinates, with the radius of
each ``y_j`` drawn from a two-sided exponential law in ``log r`` fitted to the
power behaviour of the integrand at 0 and infinity.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ._quadrature import QuadratureConfig, composite_rule
from .errors import DimensionError, DivergenceError, DomainError, SingularPointError
from .heisenberg import (
    GroupPoint,
    HeisenbergContext,
    dilate_array,
    hnorm_array,
    integrate_radial,
    sample_sphere,
)
from .rng import DEFAULT_SEED, generator, parallel_map

__all__ = [
    "IntegrationConfig",
    "MultilinearKernel",
    "OperatorValue",
    "TestFunction",
    "annulus_indicator",
    "apply_operator",
    "ball_indicator",
    "hardy_kernel",
    "hilbert_kernel",
    "hlp_kernel",
    "operator_profile",
    "pointwise_function",
    "power_function",
    "radial_function",
    "radialize",
    "reduced_radial_integral",
    "sampled_profile",
    "zero_function",
]

# keys naming independent random streams
KEY_APPLY = 11
KEY_RADIALIZE = 12
KEY_REDUCED = 13
KEY_CHECK = 14

_U_CAP = 150.0
_TAIL_DEPTH = 45.0


@dataclass(frozen=True)
class IntegrationConfig:
    """Settings shared by operator evaluation and the constant integrals.

    ``method`` is ``"auto"`` (nested quadrature up to ``max_quadrature_dim``
    radial variables, Monte Carlo beyond), ``"quadrature"`` or
    ``"monte-carlo"``.
    """

    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    method: str = "auto"
    mc_samples: int = 2**18
    strata: int = 64
    seed: int = DEFAULT_SEED
    sphere_samples: int = 4096
    nested_order: int = 16
    nested_h0: float = 0.25
    max_quadrature_dim: int = 2
    upper_rate: float | None = None

    def with_(self, **kw) -> "IntegrationConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class OperatorValue:
    value: float
    error: float
    method: str

    def __iter__(self):
        yield self.value
        yield self.error


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A function on H^n together with the hints integration needs.

    ``kind`` is ``"radial-profile"`` (``func`` maps radii to values),
    ``"sampled"`` (a tabulated radial profile) or ``"closed-form-on-points"``
    (``func`` maps an ``(N, 2n+1)`` coordinate array to values).  ``support``
    brackets the gauge radii where the function may be nonzero,
    ``breakpoints`` lists radii where the profile has kinks, and ``powers``
    gives ``s`` with ``f ~ r^s`` near 0 and near infinity when known.
    """

    __test__ = False

    kind: str
    func: Callable
    support: tuple[float, float] = (0.0, math.inf)
    breakpoints: tuple[float, ...] = ()
    powers: tuple[float | None, float | None] = (None, None)
    is_zero: bool = False
    label: str = ""

    @property
    def is_radial(self) -> bool:
        return self.kind in ("radial-profile", "sampled")

    def _mask(self, r: np.ndarray) -> np.ndarray:
        lo, hi = self.support
        return (r >= lo) & (r <= hi)

    def profile(self, r) -> np.ndarray:
        if not self.is_radial:
            raise DomainError(f"{self.label or 'function'} is not radial")
        r = np.asarray(r, dtype=float)
        if self.is_zero:
            return np.zeros_like(r)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = np.asarray(self.func(r), dtype=float) * np.ones_like(r)
        return np.where(self._mask(r), vals, 0.0)

    def at_points(self, coords: np.ndarray, n: int) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        r = hnorm_array(coords, n)
        if self.is_zero:
            return np.zeros_like(r)
        if self.is_radial:
            return self.profile(r)
        vals = np.asarray(self.func(coords), dtype=float) * np.ones_like(r)
        return np.where(self._mask(r), vals, 0.0)

    def __call__(self, x: GroupPoint) -> float:
        return float(self.at_points(x.coords[None, :], x.ctx.n)[0])


def radial_function(profile, support=(0.0, math.inf), breakpoints=(), powers=(None, None), label="") -> TestFunction:
    return TestFunction(
        "radial-profile", profile, tuple(support), tuple(breakpoints), tuple(powers), label=label or "radial"
    )


def pointwise_function(func, support=(0.0, math.inf), breakpoints=(), label="") -> TestFunction:
    return TestFunction(
        "closed-form-on-points", func, tuple(support), tuple(breakpoints), label=label or "pointwise"
    )


def power_function(a: float, r_min: float = 0.0, r_max: float = math.inf) -> TestFunction:
    """``|x|_h^a`` restricted to ``r_min <= |x|_h <= r_max``."""
    a = float(a)
    br = tuple(b for b in (r_min, r_max) if 0.0 < b < math.inf)
    powers = (a if r_min == 0.0 else None, a if r_max == math.inf else None)
    return TestFunction(
        "radial-profile",
        lambda r: r**a,
        (float(r_min), float(r_max)),
        br,
        powers,
        label=f"|x|^{a:g} on [{r_min:g}, {r_max:g}]",
    )


def ball_indicator(radius: float) -> TestFunction:
    f = power_function(0.0, 0.0, radius)
    return replace(f, func=lambda r: np.ones_like(r), label=f"chi_B(0,{radius:g})")


def annulus_indicator(r1: float, r2: float) -> TestFunction:
    f = power_function(0.0, r1, r2)
    return replace(f, func=lambda r: np.ones_like(r), label=f"chi_{{{r1:g}<=|x|<={r2:g}}}")


def zero_function() -> TestFunction:
    return TestFunction("radial-profile", lambda r: np.zeros_like(r), (0.0, math.inf), is_zero=True, label="0")


def sampled_profile(radii: Sequence[float], values: Sequence[float], label: str = "sampled") -> TestFunction:
    """Tabulated radial profile, interpolated linearly in ``(log r, value)``."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    order = np.argsort(r)
    r, v = r[order], v[order]
    lr = np.log(r)

    def func(x):
        return np.interp(np.log(np.maximum(x, 1e-300)), lr, v, left=0.0, right=0.0)

    return TestFunction("sampled", func, (float(r[0]), float(r[-1])), label=label)


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True, eq=False)
class MultilinearKernel:
    """A nonnegative m-linear kernel ``K(x, y_1..y_m)`` on H^n.

    ``evaluate(x, ys)`` takes an ``(N, 2n+1)`` array and a list of m such
    arrays.  When ``radial_reducible`` the kernel depends only on the gauge
    norms and ``radial_evaluate(r0, rs)`` evaluates it from them.  ``factor``
    (optional) is a radial function ``k(r0, r)`` with
    ``K = prod_j k(|x|, |y_j|)``.  ``bounded_by_x`` declares that K vanishes
    unless every ``|y_j| <= |x|``.
    """

    ctx: HeisenbergContext
    m: int
    evaluate: Callable[[np.ndarray, list[np.ndarray]], np.ndarray]
    homogeneity_degree: float
    radial_reducible: bool = False
    radial_evaluate: Callable[[np.ndarray, list[np.ndarray]], np.ndarray] | None = None
    factor: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    bounded_by_x: bool = False
    name: str = "custom"

    def __call__(self, x: GroupPoint, *ys: GroupPoint) -> float:
        if len(ys) != self.m:
            raise DimensionError(f"{self.name} kernel takes {self.m} y-arguments, got {len(ys)}")
        for p in (x, *ys):
            if p.ctx.n != self.ctx.n:
                raise DimensionError("kernel and points live on different groups")
        return float(self.evaluate(x.coords[None, :], [y.coords[None, :] for y in ys])[0])

    def check_invariants(self, samples: int = 256, seed: int = DEFAULT_SEED, t: float = 2.0) -> dict:
        """Measure nonnegativity, radial consistency and homogeneity on random points."""
        rng = generator(seed, KEY_CHECK)
        n = self.ctx.n
        pts = [random_points(self.ctx, samples, rng) for _ in range(self.m + 1)]
        x, ys = pts[0], pts[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            k = self.evaluate(x, ys)
            kt = self.evaluate(dilate_array(t, x, n), [dilate_array(t, y, n) for y in ys])
        out = {"min_value": float(np.min(k))}
        pos = k > 0
        if np.any(pos):
            degrees = np.log(kt[pos] / k[pos]) / math.log(t)
            out["measured_degree"] = float(np.median(degrees))
            out["degree_spread"] = float(np.max(np.abs(degrees - self.homogeneity_degree)))
        if self.radial_reducible and self.radial_evaluate is not None:
            kr = self.radial_evaluate(hnorm_array(x, n), [hnorm_array(y, n) for y in ys])
            scale = np.maximum(np.abs(k), 1e-300)
            out["radial_mismatch"] = float(np.max(np.abs(kr - k) / scale))
        return out


def random_points(ctx: HeisenbergContext, size: int, rng: np.random.Generator, spread: float = 1.5) -> np.ndarray:
    """Gaussian directions at log-normally distributed gauge radii."""
    raw = rng.normal(size=(size, ctx.dim))
    r = np.exp(rng.normal(scale=spread, size=size))
    return dilate_array(r / hnorm_array(raw, ctx.n), raw, ctx.n)


def _norms(ctx, x, ys):
    n = ctx.n
    return hnorm_array(x, n), [hnorm_array(y, n) for y in ys]


def hilbert_kernel(ctx: HeisenbergContext, m: int) -> MultilinearKernel:
    """``1 / (|x|^Q + |y_1|^Q + ... + |y_m|^Q)^m``."""
    if m < 1:
        raise DomainError("m must be at least 1")
    Q = ctx.Q

    def radial(r0, rs):
        s = np.asarray(r0, dtype=float) ** Q
        for r in rs:
            s = s + np.asarray(r, dtype=float) ** Q
        with np.errstate(divide="ignore", over="ignore"):
            return s ** (-float(m))

    def evaluate(x, ys):
        r0, rs = _norms(ctx, x, ys)
        return radial(r0, rs)

    return MultilinearKernel(ctx, m, evaluate, -float(Q * m), True, radial, name="hilbert")


def hlp_kernel(ctx: HeisenbergContext, m: int) -> MultilinearKernel:
    """``1 / max(|x|^Q, |y_1|^Q, ..., |y_m|^Q)^m`` (Hardy-Littlewood-Polya)."""
    if m < 1:
        raise DomainError("m must be at least 1")
    Q = ctx.Q

    def radial(r0, rs):
        big = np.asarray(r0, dtype=float)
        for r in rs:
            big = np.maximum(big, r)
        if np.any(big == 0.0):
            raise SingularPointError("HLP kernel is undefined when all arguments vanish")
        with np.errstate(over="ignore"):
            return big ** (-float(Q * m))

    def evaluate(x, ys):
        r0, rs = _norms(ctx, x, ys)
        return radial(r0, rs)

    return MultilinearKernel(ctx, m, evaluate, -float(Q * m), True, radial, name="hlp")


def hardy_kernel(ctx: HeisenbergContext, m: int) -> MultilinearKernel:
    """``(Omega_Q |x|^Q)^-m prod_i chi(|y_i| <= |x|)``: the product of ball averages."""
    if m < 1:
        raise DomainError("m must be at least 1")
    Q = ctx.Q
    big = ctx.omega_big

    def factor(r0, r):
        r0 = np.asarray(r0, dtype=float)
        return np.where(np.asarray(r) <= r0, 1.0, 0.0) / (big * r0**Q)

    def radial(r0, rs):
        r0 = np.asarray(r0, dtype=float)
        if np.any(r0 == 0.0):
            raise SingularPointError("Hardy kernel is undefined at x = 0")
        out = np.ones(np.broadcast(r0, *rs).shape)
        for r in rs:
            out = out * factor(r0, r)
        return out

    def evaluate(x, ys):
        r0, rs = _norms(ctx, x, ys)
        return radial(r0, rs)

    return MultilinearKernel(
        ctx, m, evaluate, -float(Q * m), True, radial, factor=factor, bounded_by_x=True, name="hardy"
    )


# ---------------------------------------------------------------------------
# reduced radial integrals


@dataclass(frozen=True)
class _Axis:
    """Integration data of one radial variable, in ``u = log r``."""

    lo: float
    hi: float
    fixed: tuple[float, ...]
    graded_lo: bool
    graded_hi: bool
    rate_lo: float
    rate_hi: float | None


def _axes(ctx, kernel_bounded, degree, fs, r0, upper_rate=None) -> list[_Axis]:
    Q = ctx.Q
    c = math.log(r0)
    rates_inf = []
    for f in fs:
        if f.support[1] == math.inf:
            s = f.powers[1] if f.powers[1] is not None else 0.0
            rates_inf.append(Q + s)
    axes = []
    all_rate = -degree - sum(max(r, 0.0) for r in rates_inf)
    for f in fs:
        lo_r, hi_r = f.support
        fixed = {c}
        fixed.update(math.log(b) for b in f.breakpoints if 0.0 < b < math.inf)
        s0 = f.powers[0] if f.powers[0] is not None else 0.0
        rate_lo = Q + s0
        if lo_r > 0.0:
            lo, glo = math.log(lo_r), True
        else:
            if rate_lo <= 0.0:
                raise DivergenceError(
                    f"integrand ~ r^{s0 + Q - 1:g} at 0 is not integrable ({f.label})"
                )
            lo, glo = min(fixed) - _TAIL_DEPTH / rate_lo, False
        rate_hi = None
        if hi_r < math.inf:
            hi, ghi = math.log(hi_r), True
        elif kernel_bounded:
            hi, ghi = c, True
        else:
            rate_hi = all_rate if upper_rate is None else upper_rate
            if rate_hi <= 0.0:
                raise DivergenceError(
                    "integrand is not integrable at infinity: combined decay rate"
                    f" {rate_hi:g} <= 0 in log-radius"
                )
            hi, ghi = max(fixed) + _TAIL_DEPTH / rate_hi, False
        if kernel_bounded:
            hi, ghi = min(hi, c), True
        lo = max(lo, -_U_CAP)
        hi = min(hi, _U_CAP)
        axes.append(_Axis(lo, hi, tuple(sorted(fixed)), glo, ghi, rate_lo, rate_hi))
    return axes


def _fractions(P: int, left: bool, right: bool) -> np.ndarray:
    """Panel edge positions in [0, 1], geometrically refined at graded ends."""
    if left and right:
        half = _fractions(P, True, False) * 0.5
        return np.concatenate([half, 1.0 - half[::-1][1:]])
    g = (2.0 ** np.arange(P + 1) - 1.0) / (2.0**P - 1.0)
    if left:
        return g
    if right:
        return 1.0 - g[::-1]
    return np.linspace(0.0, 1.0, P + 1)


def _segment_rule(bounds: np.ndarray, graded: np.ndarray, P: int, G: int):
    """Composite rule on rows of sorted ``bounds``; ``graded`` flags each bound."""
    B, K = bounds.shape
    a = bounds[:, :-1]
    b = bounds[:, 1:]
    nodes, weights = [], []
    glo = graded[:, :-1]
    ghi = graded[:, 1:]
    for left in (False, True):
        for right in (False, True):
            fr = _fractions(P, left, right)
            sel = (glo == left) & (ghi == right)
            if not np.any(sel):
                continue
            edges = a[..., None] + (b - a)[..., None] * fr
            x, w = composite_rule(edges, G)
            w = np.where(sel[..., None], w, 0.0)
            nodes.append(x.reshape(B, -1))
            weights.append(w.reshape(B, -1))
    return np.concatenate(nodes, axis=1), np.concatenate(weights, axis=1)


def _nested_gl(F, axes: list[_Axis], P: int, G: int, chunk: int = 1 << 21) -> float:
    m = len(axes)

    def level(prefix: np.ndarray) -> np.ndarray:
        j = prefix.shape[1]
        if j == m:
            return F(prefix)
        ax = axes[j]
        B = prefix.shape[0]
        fixed = np.array([f for f in ax.fixed if ax.lo < f < ax.hi], dtype=float)
        bounds = [np.full((B, 1), ax.lo)]
        flags = [np.full((B, 1), ax.graded_lo)]
        if fixed.size:
            bounds.append(np.broadcast_to(fixed, (B, fixed.size)))
            flags.append(np.ones((B, fixed.size), dtype=bool))
        if j:
            bounds.append(np.clip(prefix, ax.lo, ax.hi))
            flags.append(np.ones((B, j), dtype=bool))
        bounds.append(np.full((B, 1), ax.hi))
        flags.append(np.full((B, 1), ax.graded_hi))
        bnd = np.concatenate(bounds, axis=1)
        flg = np.concatenate(flags, axis=1)
        order = np.argsort(bnd, axis=1, kind="stable")
        bnd = np.take_along_axis(bnd, order, axis=1)
        flg = np.take_along_axis(flg, order, axis=1)
        nodes, weights = _segment_rule(bnd, flg, P, G)
        N = nodes.shape[1]
        out = np.empty(B)
        step = max(1, chunk // max(N, 1))
        for s in range(0, B, step):
            e = min(B, s + step)
            pre = np.repeat(prefix[s:e], N, axis=0)
            full = np.concatenate([pre, nodes[s:e].reshape(-1, 1)], axis=1)
            vals = level(full).reshape(e - s, N)
            out[s:e] = np.sum(vals * weights[s:e], axis=1)
        return out

    return float(level(np.empty((1, 0)))[0])


class _TwoSidedExp:
    """Density on [lo, hi] proportional to exp(a (u - c)) left of c and exp(-b (u - c)) right of it."""

    def __init__(self, lo, c, hi, a, b):
        c = min(max(c, lo), hi)
        self.lo, self.c, self.hi, self.a, self.b = lo, c, hi, a, b
        self.EL = math.exp(-a * (c - lo)) if math.isfinite(lo) else 0.0
        self.ML = (1.0 - self.EL) / a
        self.MR = -math.expm1(-b * (hi - c)) / b if math.isfinite(hi) else 1.0 / b
        self.Z = self.ML + self.MR

    def ppf(self, v: np.ndarray) -> np.ndarray:
        t = v * self.Z
        left = t < self.ML
        with np.errstate(divide="ignore", invalid="ignore"):
            ul = self.c + np.log(self.a * t + self.EL) / self.a
            ur = self.c - np.log1p(-self.b * (t - self.ML)) / self.b
        return np.clip(np.where(left, ul, ur), self.lo, self.hi)

    def pdf(self, u: np.ndarray) -> np.ndarray:
        d = u - self.c
        return np.where(d < 0.0, np.exp(self.a * d), np.exp(-self.b * d)) / self.Z


class _ProductProposal:
    """Independent two-sided exponential laws, one per radial variable."""

    def __init__(self, props: list[_TwoSidedExp]):
        self.props = props

    def sample(self, v: np.ndarray) -> np.ndarray:
        return np.column_stack([p.ppf(v[:, j]) for j, p in enumerate(self.props)])

    def pdf(self, u: np.ndarray) -> np.ndarray:
        return np.prod([p.pdf(u[:, j]) for j, p in enumerate(self.props)], axis=0)


class _RidgeProposal:
    """Variable ``k`` is the largest: ``u_k = c + Exp(beta)``, ``u_i = u_k - Exp(a_i)``.

    Matches integrands that decay like ``exp(-beta max u)`` once the largest
    radius passes ``exp(c)`` and grow like ``exp(a_i u_i)`` below it, which is
    the shape of the reduced integrals of homogeneous kernels in the region
    where one radius dominates.
    """

    def __init__(self, k: int, c: float, beta: float, rates: Sequence[float]):
        self.k, self.c, self.beta, self.rates = k, c, beta, np.asarray(rates, dtype=float)

    def sample(self, v: np.ndarray) -> np.ndarray:
        t = self.c - np.log1p(-v[:, self.k]) / self.beta
        u = t[:, None] + np.log1p(-v) / self.rates
        u[:, self.k] = t
        return u

    def pdf(self, u: np.ndarray) -> np.ndarray:
        t = u[:, self.k]
        d = t[:, None] - u
        d[:, self.k] = 0.0
        ok = (t > self.c) & np.all(d >= 0.0, axis=1)
        rates = self.rates.copy()
        rates[self.k] = 1.0
        with np.errstate(over="ignore"):
            logp = math.log(self.beta) - self.beta * (t - self.c) + np.sum(np.log(rates) - rates * d, axis=1)
        return np.where(ok, np.exp(logp), 0.0)


class _OrthantProposal:
    """All variables below ``c``: ``u_i = c - Exp(a_i)``."""

    def __init__(self, c: float, rates: Sequence[float]):
        self.c, self.rates = c, np.asarray(rates, dtype=float)

    def sample(self, v: np.ndarray) -> np.ndarray:
        return self.c + np.log1p(-v) / self.rates

    def pdf(self, u: np.ndarray) -> np.ndarray:
        d = self.c - u
        ok = np.all(d >= 0.0, axis=1)
        return np.where(ok, np.exp(np.sum(np.log(self.rates) - self.rates * np.maximum(d, 0.0), axis=1)), 0.0)


def _mc_proposals(axes: list[_Axis], c: float, default_upper: float):
    """Mixture components and weights for a reduced radial integral."""
    m = len(axes)
    props = []
    for ax in axes:
        if ax.rate_hi is not None:
            b = ax.rate_hi / m
        else:
            b = default_upper
        props.append(_TwoSidedExp(ax.lo if ax.graded_lo else -math.inf, c, ax.hi if ax.graded_hi else math.inf, ax.rate_lo, b))
    comps = [_ProductProposal(props)]
    unbounded = all(ax.rate_hi is not None for ax in axes)
    if m > 1 and unbounded and all(ax.rate_lo > 0.0 for ax in axes):
        beta = axes[0].rate_hi
        rates = [ax.rate_lo for ax in axes]
        comps.append(_OrthantProposal(c, rates))
        comps.extend(_RidgeProposal(k, c, beta, rates) for k in range(m))
        weights = [0.02] + [0.98 / (m + 1)] * (m + 1)
    else:
        weights = [1.0]
    return comps, weights


def _stratified_mc(estimand, comps, weights, cfg: IntegrationConfig, key: tuple[int, ...]):
    """Stratified importance sampling from a mixture of proposals.

    Each component receives its share of ``cfg.mc_samples`` (deterministic
    allocation) and is stratified over its uniform variates; samples are
    weighted by the full mixture density.  ``estimand(u, rng)`` returns
    integrand values at log-radii ``u`` of shape ``(N, m)``.  Returns
    ``(value, standard_error)``.
    """
    jobs = []
    for ci, (comp, wt) in enumerate(zip(comps, weights)):
        m = len(comp.props) if isinstance(comp, _ProductProposal) else comp.rates.size
        K = max(1, int(round(cfg.strata ** (1.0 / m))))
        cells = list(itertools.product(range(K), repeat=m))
        per = max(2, int(math.ceil(wt * cfg.mc_samples / len(cells))))
        jobs.extend((ci, cid, cell, K, per, wt / len(cells)) for cid, cell in enumerate(cells))

    def density(u):
        return sum(w * c.pdf(u) for c, w in zip(comps, weights))

    def run(job):
        ci, cid, cell, K, per, prob = job
        rng = generator(cfg.seed, *key, ci, cid)
        v = (np.asarray(cell, dtype=float) + rng.uniform(size=(per, len(cell)))) / K
        u = comps[ci].sample(v)
        vals = estimand(u, rng) / density(u)
        return prob * vals.mean(), prob * prob * vals.var(ddof=1) / per

    results = parallel_map(run, jobs)
    mean = sum(r[0] for r in results)
    var = sum(r[1] for r in results)
    return float(mean), float(math.sqrt(max(var, 0.0)))


def reduced_radial_integral(
    kernel: MultilinearKernel,
    weights: Sequence[TestFunction],
    r0: float,
    cfg: IntegrationConfig | None = None,
    key: tuple[int, ...] = (KEY_REDUCED,),
) -> OperatorValue:
    """``omega_Q^m int K_rad(r0, r_1..r_m) prod_j w_j(r_j) r_j^(Q-1) dr_j``.

    ``weights`` are radial test functions (their support and power hints fix
    the integration box).  Returns the value with an error estimate; Monte
    Carlo errors are reported at three standard errors.
    """
    cfg = cfg or IntegrationConfig()
    ctx = kernel.ctx
    m = kernel.m
    if len(weights) != m:
        raise DimensionError(f"{kernel.name} kernel is {m}-linear, got {len(weights)} functions")
    if not kernel.radial_reducible or kernel.radial_evaluate is None:
        raise DomainError(f"{kernel.name} kernel is not radially reducible")
    if any(f.is_zero for f in weights):
        return OperatorValue(0.0, 0.0, "closed-form")
    Q = ctx.Q
    w = ctx.omega_small

    if kernel.factor is not None:
        value, rel = 1.0, 0.0
        for f in weights:
            brk = [r0, *f.breakpoints]
            lo, hi = f.support
            if kernel.bounded_by_x:
                hi = min(hi, r0)
            if hi <= lo:
                return OperatorValue(0.0, 0.0, "quadrature")
            res = integrate_radial(
                ctx,
                lambda r, f=f: kernel.factor(r0, r) * f.profile(r),
                lo,
                hi,
                cfg.quad,
                breakpoints=brk,
                powers=(f.powers[0], f.powers[1]),
                vectorized=True,
            )
            value *= res.value
            rel += res.error / abs(res.value) if res.value else 0.0
        return OperatorValue(value, abs(value) * rel, "quadrature")

    axes = _axes(ctx, kernel.bounded_by_x, kernel.homogeneity_degree, weights, r0, cfg.upper_rate)
    if any(ax.hi <= ax.lo for ax in axes):
        return OperatorValue(0.0, 0.0, "quadrature")

    def F(u: np.ndarray) -> np.ndarray:
        r = np.exp(u)
        rs = [r[:, j] for j in range(m)]
        with np.errstate(over="ignore", invalid="ignore", under="ignore", divide="ignore"):
            val = kernel.radial_evaluate(np.full(u.shape[0], r0), rs)
            for j, f in enumerate(weights):
                val = val * f.profile(rs[j]) * np.exp(Q * u[:, j])
        val = np.where(np.isnan(val), 0.0, val)
        return (w**m) * val

    method = cfg.method
    if method == "auto":
        method = "quadrature" if m <= cfg.max_quadrature_dim else "monte-carlo"
    if method == "quadrature":
        span = max(ax.hi - ax.lo for ax in axes)
        P = max(3, int(math.ceil(math.log2(span / (2.0 * cfg.nested_h0) + 1.0))))
        G = cfg.nested_order
        hi_val = _nested_gl(F, axes, P, G)
        lo_val = _nested_gl(F, axes, P, max(4, G - 6))
        return OperatorValue(hi_val, abs(hi_val - lo_val) + 1e-15 * abs(hi_val), "quadrature")
    if method == "monte-carlo":
        comps, mix = _mc_proposals(axes, math.log(r0), cfg.upper_rate or 1.0)
        val, se = _stratified_mc(lambda u, rng: F(u), comps, mix, cfg, key)
        return OperatorValue(val, 3.0 * se, "monte-carlo")
    raise DomainError(f"unknown integration method {cfg.method!r}")


def _mc_points(kernel, fs, x: np.ndarray, cfg: IntegrationConfig, key) -> OperatorValue:
    ctx = kernel.ctx
    n, Q, w, m = ctx.n, ctx.Q, ctx.omega_small, kernel.m
    r0 = float(hnorm_array(x, n))
    c = math.log(r0) if r0 > 0.0 else 0.0
    props = []
    for f in fs:
        lo_r, hi_r = f.support
        lo = math.log(lo_r) if lo_r > 0.0 else -math.inf
        hi = math.log(hi_r) if hi_r < math.inf else math.inf
        if kernel.bounded_by_x and r0 > 0.0:
            hi = min(hi, c)
        if hi <= lo:
            return OperatorValue(0.0, 0.0, "monte-carlo")
        s0 = f.powers[0] if f.powers[0] is not None else 0.0
        a = max(Q + s0, 0.5)
        b = cfg.upper_rate or max(-kernel.homogeneity_degree / m - Q, 0.5)
        props.append(_TwoSidedExp(lo, c, hi, a, b))

    def estimand(u, rng):
        N = u.shape[0]
        ys = []
        jac = np.ones(N)
        for j, f in enumerate(fs):
            xi = sample_sphere(ctx, N, rng)
            y = dilate_array(np.exp(u[:, j]), xi, n)
            ys.append(y)
            jac = jac * w * np.exp(Q * u[:, j]) * f.at_points(y, n)
        xs = np.broadcast_to(x, (N, ctx.dim))
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            val = kernel.evaluate(xs, ys) * jac
        return np.where(np.isnan(val), 0.0, val)

    val, se = _stratified_mc(estimand, [_ProductProposal(props)], [1.0], cfg, key)
    return OperatorValue(val, 3.0 * se, "monte-carlo")


def apply_operator(
    kernel: MultilinearKernel,
    fs: Sequence[TestFunction],
    x: GroupPoint,
    cfg: IntegrationConfig | None = None,
) -> OperatorValue:
    """Evaluate ``H(f_1..f_m)(x)`` with an error estimate.

    Radial kernels with radial inputs use the exact reduction to radii (the
    value then depends on ``|x|_h`` only).  Anything else is integrated by
    stratified Monte Carlo over ``(y_1..y_m)`` with polar sampling.
    """
    cfg = cfg or IntegrationConfig()
    if len(fs) != kernel.m:
        raise DimensionError(f"{kernel.name} kernel is {kernel.m}-linear, got {len(fs)} functions")
    if x.ctx.n != kernel.ctx.n:
        raise DimensionError("point and kernel live on different groups")
    if any(f.is_zero for f in fs):
        return OperatorValue(0.0, 0.0, "closed-form")
    r0 = hnorm(x)
    if kernel.radial_reducible and all(f.is_radial for f in fs) and cfg.method != "monte-carlo":
        if r0 == 0.0:
            raise SingularPointError("radial reduction needs x != 0")
        return reduced_radial_integral(kernel, fs, r0, cfg)
    return _mc_points(kernel, fs, x.coords, cfg, (KEY_APPLY,))


def hnorm(x: GroupPoint) -> float:
    return float(hnorm_array(x.coords, x.ctx.n))


def operator_profile(
    kernel: MultilinearKernel,
    fs: Sequence[TestFunction],
    radii: Sequence[float],
    cfg: IntegrationConfig | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Values and errors of ``H(f)(x)`` at ``|x|_h = radii`` for radial inputs."""
    cfg = cfg or IntegrationConfig()
    radii = np.asarray(radii, dtype=float)

    def one(item):
        k, r = item
        res = reduced_radial_integral(kernel, fs, float(r), cfg, key=(KEY_REDUCED, k))
        return res.value, res.error

    out = parallel_map(one, list(enumerate(radii)))
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def radialize(f: TestFunction, ctx: HeisenbergContext, cfg: IntegrationConfig | None = None) -> TestFunction:
    """Sphere average ``g(r) = (1/omega_Q) int_{|xi|=1} f(delta_r xi) dxi`` as a radial profile.

    The average uses a fixed antithetic sample of the normalized surface
    measure (see :func:`hsharp.heisenberg.sample_sphere`), so the profile is a
    deterministic function of ``r`` and odd functions average to zero.
    """
    if f.is_radial:
        return f
    cfg = cfg or IntegrationConfig()
    xi = sample_sphere(ctx, cfg.sphere_samples, generator(cfg.seed, KEY_RADIALIZE))
    n = ctx.n

    def profile(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty(r.shape)
        flat = r.ravel()
        res = out.ravel()
        step = max(1, (1 << 20) // xi.shape[0])
        for s in range(0, flat.size, step):
            rr = flat[s : s + step]
            pts = dilate_array(np.repeat(rr, xi.shape[0]), np.tile(xi, (rr.size, 1)), n)
            res[s : s + step] = f.at_points(pts, n).reshape(rr.size, -1).mean(axis=1)
        return res.reshape(r.shape)

    return TestFunction(
        "radial-profile", profile, f.support, f.breakpoints, f.powers, label=f"radialized {f.label}"
    )
