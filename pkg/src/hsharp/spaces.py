"""Weighted Lebesgue, weak Lebesgue and Morrey norms on H^n.

Radial functions on centered domains use exact radial quadrature.  Non-radial
functions on centered domains combine a fixed sample of the unit sphere with
radial quadrature along each sampled direction; off-center balls are sampled
uniformly.  Morrey norms are maxima over an explicit, reported family of
balls, never claimed as true suprema.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DivergenceError, DomainError
from .heisenberg import (
    GroupPoint,
    HeisenbergContext,
    dilate_array,
    hnorm_array,
    integrate_radial,
    origin,
    sample_ball,
    sample_sphere,
)
from .kernels import IntegrationConfig, TestFunction
from .measures import BallSpec, Weight, ball_integral, power_weight, weight_measure
from .rng import DEFAULT_SEED, generator, parallel_map

__all__ = [
    "BallSearchConfig",
    "BallSpec",
    "MorreyNorm",
    "MorreyParams",
    "NormValue",
    "dilate_function",
    "dilation_scaling_check",
    "lp_norm",
    "morrey_ball_quantity",
    "morrey_two_weight_norm",
    "morrey_weighted_norm",
    "weak_lp_norm",
    "weak_morrey_weighted_norm",
]

KEY_LP = 21
KEY_WEAK = 22
KEY_MORREY = 23
KEY_MEASURE = 24

_WEAK_LEVELS = 64


@dataclass(frozen=True)
class MorreyParams:
    """Exponents of a Morrey space.

    Two-weight spaces use ``q, lam, alpha, gamma`` (weights ``|x|^alpha`` on
    the ball measure and ``|x|^gamma`` in the integral); single-weight spaces
    use ``kappa``.
    """

    q: float
    lam: float = -0.5
    alpha: float = 0.0
    gamma: float = 0.0
    kappa: float = 0.5

    def __post_init__(self):
        if not self.q >= 1.0:
            raise DomainError(f"Morrey exponent q must be >= 1, got {self.q!r}")
        if not (-1.0 / self.q <= self.lam < 0.0):
            raise DomainError(f"need -1/q <= lambda < 0, got lambda={self.lam!r}, q={self.q!r}")
        if not (0.0 < self.kappa < 1.0):
            raise DomainError(f"need 0 < kappa < 1, got {self.kappa!r}")

    def ball_exponent(self, Q: int) -> float:
        """Exponent picked up by the per-ball quantity under ``f -> f(delta_t .)``."""
        return Q * self.lam - self.gamma / self.q + self.alpha * (self.lam + 1.0 / self.q)


@dataclass(frozen=True)
class BallSearchConfig:
    """The finite family of balls a Morrey or A_p supremum is taken over.

    Centers are the origin and ``k e_1`` for ``center_count`` log-spaced
    ``k`` in ``center_range``; radii are ``radius_count`` log-spaced values
    in ``radius_range``.
    """

    radius_range: tuple[float, float] = (1e-3, 1e3)
    radius_count: int = 13
    center_range: tuple[float, float] = (1e-2, 1e2)
    center_count: int = 5
    centered_only: bool = False
    mc_samples: int = 1 << 15
    seed: int = DEFAULT_SEED

    def radii(self) -> np.ndarray:
        lo, hi = self.radius_range
        if self.radius_count == 1:
            return np.array([lo])
        return np.geomspace(lo, hi, self.radius_count)

    def balls(self, ctx: HeisenbergContext) -> list[BallSpec]:
        centers = [origin(ctx)]
        if not self.centered_only and self.center_count > 0:
            lo, hi = self.center_range
            ks = np.geomspace(lo, hi, self.center_count) if self.center_count > 1 else np.array([lo])
            for k in ks:
                c = np.zeros(ctx.dim)
                c[0] = k
                centers.append(GroupPoint(c, ctx))
        return [BallSpec(c, r) for c in centers for r in self.radii()]

    def refined(self) -> "BallSearchConfig":
        """Roughly doubles the family: each log-spaced grid gains its midpoints."""
        return replace(
            self,
            radius_count=2 * self.radius_count - 1,
            center_count=2 * self.center_count - 1 if self.center_count > 1 else self.center_count,
        )


@dataclass(frozen=True)
class NormValue:
    value: float
    error: float
    method: str

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class MorreyNorm:
    value: float
    error: float
    argmax: BallSpec | None
    per_ball: list = field(default_factory=list)

    def __float__(self) -> float:
        return float(self.value)


def _as_weight(weight) -> Weight:
    if weight is None:
        return power_weight(0.0)
    if isinstance(weight, Weight):
        return weight
    return power_weight(float(weight))


def dilate_function(f: TestFunction, t: float) -> TestFunction:
    """``x -> f(delta_t x)``."""
    t = float(t)
    if t <= 0.0:
        raise DomainError("dilation factor must be positive")
    lo, hi = f.support
    sup = (lo / t, hi / t)
    br = tuple(b / t for b in f.breakpoints)
    if f.is_radial:
        prof = f.func
        return replace(f, kind="radial-profile", func=lambda r: prof(t * r), support=sup, breakpoints=br,
                       label=f"{f.label}(delta_{t:g} .)")
    g = f.func

    def ev(x):
        n = (x.shape[1] - 1) // 2
        return g(dilate_array(t, x, n))

    return replace(f, func=ev, support=sup, breakpoints=br, label=f"{f.label}(delta_{t:g} .)")


# ---------------------------------------------------------------------------
# weighted integrals of |f|^p


def _powers_of(f: TestFunction, p: float, a: float | None):
    a0 = 0.0 if a is None else a
    s0 = None if f.powers[0] is None else p * f.powers[0] + a0
    si = None if f.powers[1] is None else p * f.powers[1] + a0
    return s0, si


def _integral_abs_p(
    ctx: HeisenbergContext,
    f: TestFunction,
    p: float,
    w: Weight,
    ball: BallSpec | None,
    cfg: IntegrationConfig,
    key: tuple[int, ...],
) -> tuple[float, float, str]:
    """``int_D |f|^p w`` over a ball ``D`` or (``ball=None``) the whole group."""
    n = ctx.n
    if f.is_zero:
        return 0.0, 0.0, "closed-form"
    lo, hi = f.support
    if ball is None or ball.is_centered:
        r_hi = hi if ball is None else min(hi, ball.radius)
        if r_hi <= lo:
            return 0.0, 0.0, "closed-form"
        brk = [b for b in f.breakpoints if lo < b < r_hi]
        if f.is_radial and w.power is not None:
            a = w.power
            s0, si = _powers_of(f, p, a)
            if lo == 0.0 and s0 is not None and s0 + ctx.Q <= 0.0:
                raise DivergenceError(f"|f|^p w ~ r^{s0:g} is not integrable at the origin")
            if r_hi == math.inf and si is not None and si + ctx.Q >= 0.0:
                raise DivergenceError(f"|f|^p w ~ r^{si:g} is not integrable at infinity")
            res = integrate_radial(
                ctx,
                lambda r: np.abs(f.profile(r)) ** p * w.profile(r),
                lo,
                r_hi,
                cfg.quad,
                breakpoints=brk,
                powers=(s0, si if r_hi == math.inf else None),
                vectorized=True,
            )
            return res.value, res.error, "quadrature"
        # sphere sample times radial quadrature, batched for an error bar
        rng = generator(cfg.seed, *key)
        xi = sample_sphere(ctx, cfg.sphere_samples, rng)
        batches = 8
        per = (xi.shape[0] // batches) & ~1
        s0, si = _powers_of(f, p, w.power)

        def batch(k):
            dirs = xi[k * per : (k + 1) * per]

            def prof(r):
                r = np.atleast_1d(r)
                pts = dilate_array(np.repeat(r, dirs.shape[0]), np.tile(dirs, (r.size, 1)), n)
                vals = np.abs(f.at_points(pts, n)) ** p * w.at_points(pts, n)
                return vals.reshape(r.size, -1).mean(axis=1)

            res = integrate_radial(
                ctx, prof, lo, r_hi, cfg.quad, breakpoints=brk, powers=(s0, si), vectorized=True
            )
            return res.value

        vals = np.array(parallel_map(batch, range(batches)))
        se = vals.std(ddof=1) / math.sqrt(batches)
        return float(vals.mean()), 3.0 * float(se), "sphere-sampled"
    res = ball_integral(
        ball,
        lambda x: np.abs(f.at_points(x, n)) ** p * w.at_points(x, n),
        power_at_zero=_powers_of(f, p, w.power)[0] if lo == 0.0 else None,
        samples=cfg.mc_samples,
        seed=cfg.seed,
        key=key,
        quad=cfg.quad,
    )
    return res.value, res.error, res.method


def lp_norm(
    f: TestFunction,
    p: float,
    ctx: HeisenbergContext,
    weight=None,
    domain: BallSpec | None = None,
    cfg: IntegrationConfig | None = None,
    key: tuple[int, ...] = (KEY_LP,),
) -> NormValue:
    """``(int_D |f|^p w)^(1/p)`` with ``w`` a :class:`Weight` or a power exponent ``a``."""
    if not p > 0.0:
        raise DomainError(f"p must be positive, got {p!r}")
    cfg = cfg or IntegrationConfig()
    w = _as_weight(weight)
    val, err, method = _integral_abs_p(ctx, f, p, w, domain, cfg, key)
    if val <= 0.0:
        return NormValue(0.0, err ** (1.0 / p) if err > 0 else 0.0, method)
    norm = val ** (1.0 / p)
    return NormValue(norm, norm * err / (p * val), method)


# ---------------------------------------------------------------------------
# weak norms


def _radial_superlevel_measure(ctx, f: TestFunction, a: float, r_hi: float, levels: np.ndarray) -> np.ndarray:
    """``int_{|f| >= lambda, |x| <= r_hi} |x|^a dx`` for each level, radial ``f``."""
    Q = ctx.Q
    lo, hi = f.support
    hi = min(hi, r_hi)
    marks = [b for b in f.breakpoints if lo < b < hi]
    ulo = math.log(lo) if lo > 0.0 else math.log(min(marks + [hi if math.isfinite(hi) else 1.0, 1.0])) - 40.0
    uhi = math.log(hi) if math.isfinite(hi) else math.log(max(marks + [max(lo, 1.0)])) + 40.0
    u = np.linspace(ulo, uhi, 8001)
    eps = 1e-12
    extra = [math.log(b) * (1 + s * eps) for b in marks for s in (-1, 1)] if marks else []
    u = np.unique(np.concatenate([u, np.asarray(extra, dtype=float)]))
    vals = np.abs(f.profile(np.exp(u)))
    open_lo = lo == 0.0
    open_hi = not math.isfinite(hi)
    e = Q + a
    if open_lo and e <= 0.0:
        raise DivergenceError("weight is not integrable at the origin")

    def shell(r1, r2):
        return ctx.omega_small * (r2**e - r1**e) / e

    def crossings(idx, lam):
        # |f| >= lam flips between u[i] and u[i+1]; bisect every sign change at once
        a_, b_ = u[idx].copy(), u[idx + 1].copy()
        above_a = np.abs(f.profile(np.exp(a_))) >= lam
        for _ in range(60):
            mid = 0.5 * (a_ + b_)
            same = (np.abs(f.profile(np.exp(mid))) >= lam) == above_a
            a_ = np.where(same, mid, a_)
            b_ = np.where(same, b_, mid)
        return np.exp(0.5 * (a_ + b_))

    aboves = vals[None, :] >= levels[:, None]
    if open_hi and np.any(aboves[:, -1]):
        raise DivergenceError("superlevel set has infinite measure")
    flips = np.diff(aboves.astype(np.int8), axis=1)
    lev_idx, pos_idx = np.nonzero(flips)
    cr = crossings(pos_idx, levels[lev_idx]) if pos_idx.size else np.empty(0)
    out = np.zeros(levels.size)
    for k in range(levels.size):
        above = aboves[k]
        if not above.any():
            continue
        sel = lev_idx == k
        total = 0.0
        start = (0.0 if open_lo else math.exp(u[0])) if above[0] else None
        for i, c in zip(pos_idx[sel], cr[sel]):
            if above[i]:
                total += shell(start, float(c))
                start = None
            else:
                start = float(c)
        if start is not None:
            total += shell(start, math.exp(u[-1]))
        out[k] = total
    return out


def weak_lp_norm(
    f: TestFunction,
    p: float,
    ctx: HeisenbergContext,
    weight=None,
    domain: BallSpec | None = None,
    cfg: IntegrationConfig | None = None,
    key: tuple[int, ...] = (KEY_WEAK,),
) -> NormValue:
    """``sup_lambda lambda * w({|f| >= lambda} cap D)^(1/p)`` over a log-spaced level grid.

    The grid spans the observed range of ``|f|``; it is refined once around
    the best level.  Radial functions on centered domains measure superlevel
    sets exactly (root-bracketing of the profile); otherwise the measure is
    estimated from uniform samples of the domain.
    """
    if not p > 0.0:
        raise DomainError(f"p must be positive, got {p!r}")
    cfg = cfg or IntegrationConfig()
    w = _as_weight(weight)
    if f.is_zero:
        return NormValue(0.0, 0.0, "closed-form")
    n = ctx.n
    if f.is_radial and w.power is not None and (domain is None or domain.is_centered):
        r_hi = math.inf if domain is None else domain.radius
        lo, hi = f.support
        top = min(hi, r_hi)
        if top <= lo:
            return NormValue(0.0, 0.0, "closed-form")
        rr = np.geomspace(max(lo, 1e-12 * top if math.isfinite(top) else 1e-12), top if math.isfinite(top) else 1e12, 4001)
        rr = np.concatenate([rr, np.asarray([b for b in f.breakpoints if lo <= b <= top])])
        obs = np.abs(f.profile(rr))
        obs = obs[obs > 0.0]
        if obs.size == 0:
            return NormValue(0.0, 0.0, "quadrature")
        vmin, vmax = float(obs.min()), float(obs.max())
        levels = np.unique(np.concatenate([np.geomspace(vmin, vmax, _WEAK_LEVELS), [vmax]]))
        meas = _radial_superlevel_measure(ctx, f, w.power, r_hi, levels)
        score = levels * meas ** (1.0 / p)
        k = int(np.argmax(score))
        lo_l = levels[max(k - 1, 0)]
        hi_l = levels[min(k + 1, levels.size - 1)]
        fine = np.geomspace(lo_l, hi_l, _WEAK_LEVELS)
        fm = _radial_superlevel_measure(ctx, f, w.power, r_hi, fine)
        best = max(float(score[k]), float(np.max(fine * fm ** (1.0 / p))))
        return NormValue(best, 0.0, "quadrature")
    # sampled estimate on a ball
    if domain is None:
        if not math.isfinite(f.support[1]):
            raise DomainError("sampled weak norms need a bounded domain or bounded support")
        domain = BallSpec(origin(ctx), f.support[1] * (1 + 1e-12))
    rng = generator(cfg.seed, *key)
    pts = sample_ball(ctx, domain.center.coords, domain.radius, cfg.mc_samples, rng)
    vals = np.abs(f.at_points(pts, n))
    wv = w.at_points(pts, n)
    order = np.argsort(-vals, kind="stable")
    vals, wv = vals[order], wv[order]
    mass = domain.volume * np.cumsum(wv) / vals.size
    pos = vals > 0.0
    if not np.any(pos):
        return NormValue(0.0, 0.0, "monte-carlo")
    # ties: the superlevel set of a value includes all samples sharing it
    last = np.r_[vals[1:] != vals[:-1], True]
    score = np.where(pos & last, vals * mass ** (1.0 / p), 0.0)
    k = int(np.argmax(score))
    # binomial error of the mass at the maximizing level, propagated
    frac = (k + 1) / vals.size
    rel = math.sqrt(max(frac * (1 - frac), 1e-300) / vals.size) / max(frac, 1e-300)
    return NormValue(float(score[k]), 3.0 * float(score[k]) * rel / p, "monte-carlo")


# ---------------------------------------------------------------------------
# Morrey norms


def _ball_measure(ctx, w: Weight, ball: BallSpec, cfg: IntegrationConfig, key) -> float:
    return weight_measure(w, ball, samples=cfg.mc_samples, seed=cfg.seed, key=key).value


def morrey_ball_quantity(
    f: TestFunction,
    ctx: HeisenbergContext,
    ball: BallSpec,
    q: float,
    measure_weight: Weight,
    integrand_weight: Weight,
    exponent: float,
    cfg: IntegrationConfig | None = None,
    key: tuple[int, ...] = (KEY_MORREY,),
    weak: bool = False,
) -> tuple[float, float]:
    """``w1(B)^(-exponent) * ||f||_{L^q(B, w2)}`` (weak norm when ``weak``)."""
    cfg = cfg or IntegrationConfig()
    wb = _ball_measure(ctx, measure_weight, ball, cfg, key + (1,))
    if weak:
        nv = weak_lp_norm(f, q, ctx, integrand_weight, ball, cfg, key + (2,))
    else:
        nv = lp_norm(f, q, ctx, integrand_weight, ball, cfg, key + (2,))
    scale = wb ** (-exponent)
    return nv.value * scale, nv.error * scale


def _morrey_sup(f, ctx, q, w1, w2, exponent, search, cfg, weak) -> MorreyNorm:
    cfg = cfg or IntegrationConfig()
    search = search or BallSearchConfig()
    cfg = cfg.with_(mc_samples=search.mc_samples, seed=search.seed)
    if f.is_zero:
        return MorreyNorm(0.0, 0.0, None, [])
    balls = search.balls(ctx)

    def one(item):
        k, b = item
        return morrey_ball_quantity(f, ctx, b, q, w1, w2, exponent, cfg, (KEY_MORREY, k), weak)

    vals = parallel_map(one, list(enumerate(balls)))
    per = [(b, v[0]) for b, v in zip(balls, vals)]
    k = int(np.argmax([v[0] for v in vals]))
    return MorreyNorm(float(vals[k][0]), float(vals[k][1]), balls[k], per)


def morrey_two_weight_norm(
    f: TestFunction,
    ctx: HeisenbergContext,
    params: MorreyParams,
    search: BallSearchConfig | None = None,
    cfg: IntegrationConfig | None = None,
) -> MorreyNorm:
    """Max over the ball family of ``|B|_{alpha}^{-(lam+1/q)} (int_B |f|^q |x|^gamma)^(1/q)``.

    ``|B|_alpha`` is the ``|x|^alpha``-measure of ``B``.
    """
    return _morrey_sup(
        f,
        ctx,
        params.q,
        power_weight(params.alpha),
        power_weight(params.gamma),
        params.lam + 1.0 / params.q,
        search,
        cfg,
        False,
    )


def morrey_weighted_norm(
    f: TestFunction,
    ctx: HeisenbergContext,
    p: float,
    kappa: float,
    weight=None,
    search: BallSearchConfig | None = None,
    cfg: IntegrationConfig | None = None,
    integrand_weight=None,
) -> MorreyNorm:
    """Max over the ball family of ``w(B)^(-kappa/p) ||f||_{L^p(B, w)}``.

    ``integrand_weight`` (default ``w``) allows the two-weight form
    ``u(B)^(-kappa/p) ||f||_{L^p(B, v)}``.
    """
    if not (0.0 < kappa < 1.0):
        raise DomainError(f"need 0 < kappa < 1, got {kappa!r}")
    w = _as_weight(weight)
    v = w if integrand_weight is None else _as_weight(integrand_weight)
    return _morrey_sup(f, ctx, p, w, v, kappa / p, search, cfg, False)


def weak_morrey_weighted_norm(
    f: TestFunction,
    ctx: HeisenbergContext,
    p: float,
    kappa: float,
    weight=None,
    search: BallSearchConfig | None = None,
    cfg: IntegrationConfig | None = None,
    integrand_weight=None,
) -> MorreyNorm:
    """As :func:`morrey_weighted_norm` with the weak ``L^p(B, w)`` quantity."""
    if not (0.0 < kappa < 1.0):
        raise DomainError(f"need 0 < kappa < 1, got {kappa!r}")
    w = _as_weight(weight)
    v = w if integrand_weight is None else _as_weight(integrand_weight)
    return _morrey_sup(f, ctx, p, w, v, kappa / p, search, cfg, True)


# ---------------------------------------------------------------------------
# scaling identities


def dilation_scaling_check(
    f: TestFunction,
    ctx: HeisenbergContext,
    t,
    p: float,
    weight: float = 0.0,
    morrey: MorreyParams | None = None,
    ball: BallSpec | None = None,
    cfg: IntegrationConfig | None = None,
) -> tuple[float, float]:
    """Both sides of the dilation identity for ``f(delta_t .)``.

    Without ``morrey``: ``lhs = ||f(delta_t .)||_{L^p(|x|^a)}`` and
    ``rhs = t^(-(Q+a)/p) ||f||_{L^p(|x|^a)}``.  With ``morrey`` and a ball
    ``B``: ``lhs`` is the per-ball Morrey quantity of ``f(delta_t .)`` on
    ``B`` and ``rhs`` is ``t^e`` times the quantity of ``f`` on
    ``delta_t B``, ``e = Q lam - gamma/q + alpha (lam + 1/q)``.
    ``t`` may be a positive real or a group point (its gauge norm is used).
    """
    if isinstance(t, GroupPoint):
        t = float(hnorm_array(t.coords, t.ctx.n))
    t = float(t)
    if not t > 0.0:
        raise DomainError("t must be positive")
    cfg = cfg or IntegrationConfig()
    g = dilate_function(f, t)
    Q = ctx.Q
    if morrey is None:
        if ball is not None:
            raise DomainError("ball is only used with Morrey parameters")
        lhs = lp_norm(g, p, ctx, weight, None, cfg).value
        rhs = t ** (-(Q + float(weight)) / p) * lp_norm(f, p, ctx, weight, None, cfg).value
        return lhs, rhs
    if ball is None:
        ball = BallSpec(origin(ctx), 1.0)
    w1 = power_weight(morrey.alpha)
    w2 = power_weight(morrey.gamma)
    ex = morrey.lam + 1.0 / morrey.q
    lhs = morrey_ball_quantity(g, ctx, ball, morrey.q, w1, w2, ex, cfg)[0]
    rhs = t ** morrey.ball_exponent(Q) * morrey_ball_quantity(f, ctx, ball.dilated(t), morrey.q, w1, w2, ex, cfg)[0]
    return lhs, rhs
