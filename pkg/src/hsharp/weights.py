"""Muckenhoupt-type weight diagnostics on explicit ball families.

Every characteristic here is a maximum over the balls it is given, and
each report names the maximizing ball so a caller can probe further.
Power weights on centered balls use closed-form averages; everything else
is sampled uniformly from the ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, DivergenceError, DomainError
from .heisenberg import HeisenbergContext, hnorm_array, sample_ball
from .kernels import (
    IntegrationConfig,
    MultilinearKernel,
    TestFunction,
    annulus_indicator,
    ball_indicator,
    operator_profile,
    random_points,
    sampled_profile,
)
from .measures import BallSpec, Weight, power_weight, product_weight, tabulated_weight, unit_weight
from .rng import DEFAULT_SEED, generator, parallel_map

__all__ = [
    "BallReport",
    "VectorWeight",
    "Weight",
    "ap_characteristic",
    "cz_size_condition_check",
    "doubling_check",
    "indicator_family",
    "morrey_boundedness_experiment",
    "multiweight_product_check",
    "power_weight",
    "product_weight",
    "reverse_holder_check",
    "rh_measure_comparison",
    "tabulated_weight",
    "unit_weight",
    "vector_ap_characteristic",
    "vector_ap_factorization_check",
]

KEY_AVG = 31
KEY_CZ = 32
KEY_EXP = 33

ESS_INF_QUANTILE = 1e-3


@dataclass(frozen=True)
class BallReport:
    """Maximum of a per-ball quantity over a family.

    ``unbounded`` is set when some ball average is infinite; ``growth`` then
    holds the quantity on that ball with the origin cut out at shrinking
    radii, which increases without bound.
    """

    value: float
    argmax: object
    per_ball: list = field(default_factory=list)
    unbounded: bool = False
    growth: tuple[float, ...] = ()

    def __float__(self) -> float:
        return float(self.value)


class VectorWeight:
    """Weights ``w_1..w_m`` with exponents ``p_1..p_m`` and ``nu = prod w_i^{p/p_i}``."""

    def __init__(self, weights: Sequence[Weight], ps: Sequence[float]):
        if len(weights) != len(ps) or not weights:
            raise DimensionError("need one exponent per weight")
        ps = tuple(float(v) for v in ps)
        for v in ps:
            if not v >= 1.0:
                raise DomainError(f"exponents must be >= 1, got {v!r}")
        self.weights = tuple(weights)
        self.ps = ps
        self.p = 1.0 / sum(1.0 / v for v in ps)
        self.nu = product_weight(self.weights, [self.p / v for v in ps])

    @property
    def m(self) -> int:
        return len(self.weights)


# ---------------------------------------------------------------------------
# ball averages


def _avg(w: Weight, ball: BallSpec, cfg: IntegrationConfig, key) -> float:
    """``(1/|B|) int_B w``; raises :class:`DivergenceError` if infinite."""
    ctx = ball.ctx
    Q = ctx.Q
    if w.power is not None and ball.is_centered:
        a = w.power
        if Q + a <= 0.0:
            raise DivergenceError(f"average of |x|^{a:g} over a centered ball is infinite")
        return Q / (Q + a) * ball.radius**a
    if w.power is not None and w.power + Q <= 0.0 and ball.contains_origin():
        raise DivergenceError(f"|x|^{w.power:g} is not integrable near the origin")
    rng = generator(cfg.seed, *key)
    pts = sample_ball(ctx, ball.center.coords, ball.radius, cfg.mc_samples, rng)
    vals = w.at_points(pts, ctx.n)
    if not np.all(np.isfinite(vals)):
        raise DivergenceError(f"weight {w.label} is infinite on the sampled ball")
    return float(vals.mean())


def _ess_inf(w: Weight, ball: BallSpec, cfg: IntegrationConfig, key) -> float:
    """Essential infimum over the ball; a low sample quantile unless closed form."""
    ctx = ball.ctx
    if w.power is not None and ball.is_centered:
        a = w.power
        if a > 0.0:
            return 0.0
        return ball.radius**a
    rng = generator(cfg.seed, *key)
    pts = sample_ball(ctx, ball.center.coords, ball.radius, cfg.mc_samples, rng)
    return float(np.quantile(w.at_points(pts, ctx.n), ESS_INF_QUANTILE))


def _punctured_log_avg(w: Weight, ball: BallSpec, eps: float) -> float:
    """Log of the average of ``|x|^a`` over ``{eps < |x| < R}`` (normalized by ``|B_R|``)."""
    if w.power is None:
        raise DomainError("growth sequences are computed for power weights")
    Q = ball.ctx.Q
    R = ball.radius
    s = w.power + Q
    t = math.log(eps / R)
    if s == 0.0:
        return math.log(Q * -t) + w.power * math.log(R)
    # Q/s (1 - (eps/R)^s) R^a, rewritten so neither power overflows
    if s > 0.0:
        return math.log(Q / s) + math.log(-math.expm1(s * t)) + w.power * math.log(R)
    return math.log(Q / -s) + math.log(-math.expm1(-s * t)) + s * t + w.power * math.log(R)


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _cfg(cfg: IntegrationConfig | None, samples: int | None, seed: int | None) -> IntegrationConfig:
    cfg = cfg or IntegrationConfig(mc_samples=1 << 15)
    if samples is not None:
        cfg = cfg.with_(mc_samples=int(samples))
    if seed is not None:
        cfg = cfg.with_(seed=int(seed))
    return cfg


def _family_max(per: list, on_divergence: str, growth_fn=None) -> BallReport:
    finite = [(b, v) for b, v in per if math.isfinite(v)]
    bad = [(b, v) for b, v in per if not math.isfinite(v)]
    if bad:
        ball = bad[0][0]
        if on_divergence == "raise":
            raise DivergenceError(f"ball average is infinite on {ball!r}")
        growth = tuple(growth_fn(ball)) if growth_fn is not None else ()
        return BallReport(math.inf, ball, per, True, growth)
    k = int(np.argmax([v for _, v in finite]))
    return BallReport(float(finite[k][1]), finite[k][0], per, False, ())


# ---------------------------------------------------------------------------
# single weights


def ap_characteristic(
    w: Weight,
    p: float,
    balls: Sequence[BallSpec],
    cfg: IntegrationConfig | None = None,
    *,
    on_divergence: str = "raise",
    samples: int | None = None,
    seed: int | None = None,
) -> BallReport:
    """Max over ``balls`` of ``avg(w) avg(w^{-1/(p-1)})^{p-1}`` (``avg(w)/ess inf w`` at ``p = 1``).

    With ``on_divergence="flag"`` an infinite average marks the report as
    ``unbounded`` instead of raising, and ``growth`` records the quantity on
    the offending ball with the origin removed at radii ``R 10^-k``.
    """
    if not p >= 1.0:
        raise DomainError(f"need p >= 1, got {p!r}")
    if on_divergence not in ("raise", "flag"):
        raise DomainError("on_divergence must be 'raise' or 'flag'")
    cfg = _cfg(cfg, samples, seed)
    dual = w.pow(-1.0 / (p - 1.0)) if p > 1.0 else None

    def one(item):
        k, b = item
        try:
            a = _avg(w, b, cfg, (KEY_AVG, k, 0))
            if p == 1.0:
                inf = _ess_inf(w, b, cfg, (KEY_AVG, k, 1))
                return math.inf if inf <= 0.0 else a / inf
            return a * _avg(dual, b, cfg, (KEY_AVG, k, 1)) ** (p - 1.0)
        except DivergenceError:
            return math.inf

    vals = parallel_map(one, list(enumerate(balls)))
    per = list(zip(balls, vals))

    def growth(ball):
        if w.power is None or p == 1.0:
            return ()
        out = []
        for k in range(1, 7):
            eps = ball.radius * 10.0**-k
            out.append(_exp(_punctured_log_avg(w, ball, eps) + (p - 1.0) * _punctured_log_avg(dual, ball, eps)))
        return out

    return _family_max(per, on_divergence, growth)


def reverse_holder_check(
    w: Weight,
    r: float,
    balls: Sequence[BallSpec],
    cfg: IntegrationConfig | None = None,
    *,
    samples: int | None = None,
    seed: int | None = None,
) -> BallReport:
    """Max over ``balls`` of ``avg(w^r)^{1/r} / avg(w)``; at least 1 by Jensen."""
    if not r > 1.0:
        raise DomainError(f"need r > 1, got {r!r}")
    cfg = _cfg(cfg, samples, seed)
    wr = w.pow(r)

    def one(item):
        k, b = item
        return _avg(wr, b, cfg, (KEY_AVG, k, 2)) ** (1.0 / r) / _avg(w, b, cfg, (KEY_AVG, k, 0))

    per = list(zip(balls, parallel_map(one, list(enumerate(balls)))))
    return _family_max(per, "raise")


def _measure(w: Weight, ball: BallSpec, cfg, key) -> float:
    return _avg(w, ball, cfg, key) * ball.volume


def doubling_check(
    w: Weight,
    p: float,
    lambda_factors: Sequence[float],
    balls: Sequence[BallSpec],
    cfg: IntegrationConfig | None = None,
    *,
    samples: int | None = None,
    seed: int | None = None,
) -> BallReport:
    """Max over balls and ``lambda`` of ``w(lambda B) / (lambda^{Qp} w(B))``.

    ``argmax`` is the pair ``(ball, lambda)``.
    """
    lams = [float(v) for v in lambda_factors]
    if any(not v > 1.0 for v in lams):
        raise DomainError("dilation factors must exceed 1")
    cfg = _cfg(cfg, samples, seed)
    jobs = [(k, b, lam) for k, b in enumerate(balls) for lam in lams]

    def one(job):
        k, b, lam = job
        Q = b.ctx.Q
        big = _measure(w, b.scaled(lam), cfg, (KEY_AVG, k, 3, int(lam * 1000)))
        small = _measure(w, b, cfg, (KEY_AVG, k, 0))
        return big / (lam ** (Q * p) * small)

    vals = parallel_map(one, jobs)
    per = [((b, lam), v) for (_, b, lam), v in zip(jobs, vals)]
    return _family_max(per, "raise")


def rh_measure_comparison(
    w: Weight,
    r: float,
    pairs: Sequence[tuple[BallSpec, BallSpec]],
    cfg: IntegrationConfig | None = None,
    *,
    samples: int | None = None,
    seed: int | None = None,
) -> BallReport:
    """Check ``w(E)/w(B) <= C (|E|/|B|)^{(r-1)/r}`` on nested pairs ``(E, B)``.

    ``C`` is the reverse Holder bound computed on the outer balls.  The
    reported value is the largest ``(w(E)/w(B)) / (C (|E|/|B|)^{(r-1)/r})``,
    at most 1 when the comparison holds.
    """
    cfg = _cfg(cfg, samples, seed)
    outer = [B for _, B in pairs]
    C = reverse_holder_check(w, r, outer, cfg).value

    def one(item):
        k, (E, B) = item
        lhs = _measure(w, E, cfg, (KEY_AVG, k, 4)) / _measure(w, B, cfg, (KEY_AVG, k, 5))
        return lhs / (C * (E.volume / B.volume) ** ((r - 1.0) / r))

    per = list(zip(pairs, parallel_map(one, list(enumerate(pairs)))))
    rep = _family_max(per, "raise")
    return BallReport(rep.value, rep.argmax, rep.per_ball, False, (C,))


# ---------------------------------------------------------------------------
# vector weights


def _dual_factor(wi: Weight, pi: float, ball, cfg, key) -> float:
    """``avg(w_i^{1-p_i'})^{1/p_i'}``, or ``(inf w_i)^-1`` when ``p_i = 1``."""
    if pi == 1.0:
        inf = _ess_inf(wi, ball, cfg, key)
        return math.inf if inf <= 0.0 else 1.0 / inf
    pp = pi / (pi - 1.0)
    return _avg(wi.pow(1.0 - pp), ball, cfg, key) ** (1.0 / pp)


def vector_ap_characteristic(
    vw: VectorWeight,
    balls: Sequence[BallSpec],
    cfg: IntegrationConfig | None = None,
    *,
    on_divergence: str = "raise",
    samples: int | None = None,
    seed: int | None = None,
) -> BallReport:
    """Max over ``balls`` of ``avg(nu)^{1/p} prod_i avg(w_i^{1-p_i'})^{1/p_i'}``."""
    cfg = _cfg(cfg, samples, seed)

    def one(item):
        k, b = item
        try:
            val = _avg(vw.nu, b, cfg, (KEY_AVG, k, 6)) ** (1.0 / vw.p)
            for i, (wi, pi) in enumerate(zip(vw.weights, vw.ps)):
                val *= _dual_factor(wi, pi, b, cfg, (KEY_AVG, k, 7, i))
            return val
        except DivergenceError:
            return math.inf

    per = list(zip(balls, parallel_map(one, list(enumerate(balls)))))
    return _family_max(per, on_divergence)


def vector_ap_factorization_check(
    vw: VectorWeight, balls: Sequence[BallSpec], cfg: IntegrationConfig | None = None, **kw
) -> dict:
    """Joint finiteness of the vector condition and its scalar factors.

    A finite vector characteristic should come with finite
    ``A_{mp}(nu)`` and ``A_{m p_i'}(w_i^{1-p_i'})`` characteristics on the
    same family (for ``p_i > 1``).
    """
    m = vw.m
    vec = vector_ap_characteristic(vw, balls, cfg, on_divergence="flag", **kw)
    nu_rep = ap_characteristic(vw.nu, m * vw.p, balls, cfg, on_divergence="flag", **kw)
    parts = []
    for wi, pi in zip(vw.weights, vw.ps):
        if pi == 1.0:
            parts.append(None)
            continue
        pp = pi / (pi - 1.0)
        parts.append(ap_characteristic(wi.pow(1.0 - pp), m * pp, balls, cfg, on_divergence="flag", **kw))
    scalars_finite = (not nu_rep.unbounded) and all(r is None or not r.unbounded for r in parts)
    return {
        "vector": vec,
        "nu": nu_rep,
        "duals": parts,
        "vector_finite": not vec.unbounded,
        "scalars_finite": scalars_finite,
        "consistent": (not vec.unbounded) <= scalars_finite,
    }


def multiweight_product_check(
    vw: VectorWeight,
    balls: Sequence[BallSpec],
    cfg: IntegrationConfig | None = None,
    *,
    samples: int | None = None,
    seed: int | None = None,
) -> BallReport:
    """Max over ``balls`` of ``prod_i avg(w_i)^{p/p_i} / avg(nu)``."""
    cfg = _cfg(cfg, samples, seed)
    p = vw.p

    def one(item):
        k, b = item
        val = 1.0
        for i, (wi, pi) in enumerate(zip(vw.weights, vw.ps)):
            val *= _avg(wi, b, cfg, (KEY_AVG, k, 8, i)) ** (p / pi)
        return val / _avg(vw.nu, b, cfg, (KEY_AVG, k, 6))

    per = list(zip(balls, parallel_map(one, list(enumerate(balls)))))
    return _family_max(per, "raise")


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class SizeConditionReport:
    value: float
    history: tuple[float, ...]
    growing: bool
    exponent: float


def cz_size_condition_check(
    kernel: MultilinearKernel,
    samples: int = 20000,
    seed: int = DEFAULT_SEED,
    *,
    exponent: float | None = None,
    levels: int = 5,
    growth_factor: float = 4.0,
) -> SizeConditionReport:
    """Estimate ``A = sup K(x, y) (sum_j |y_j^{-1} x|)^{exponent}`` from random points.

    ``exponent`` defaults to ``mQ``.  The sample is doubled ``levels - 1``
    times; ``history`` holds the running maximum and ``growing`` is set when
    the final maximum exceeds the first by more than ``growth_factor``.  A
    sampled maximum creeps up slowly even for a bounded quantity, so the
    factor is loose; a wrong exponent drives order-of-magnitude growth.
    """
    from .heisenberg import mul_array

    ctx = kernel.ctx
    n, m = ctx.n, kernel.m
    ex = float(m * ctx.Q if exponent is None else exponent)
    best = 0.0
    history = []
    size = int(samples)
    for lev in range(levels):
        rng = generator(seed, KEY_CZ, lev)
        x = random_points(ctx, size, rng)
        ys = [random_points(ctx, size, rng) for _ in range(m)]
        s = np.zeros(size)
        for y in ys:
            s = s + hnorm_array(mul_array(-y, x, n), n)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = kernel.evaluate(x, ys) * s**ex
        vals = vals[np.isfinite(vals) & (s > 0)]
        if vals.size:
            best = max(best, float(vals.max()))
        history.append(best)
        size *= 2
    growing = len(history) >= 2 and history[0] > 0.0 and history[-1] > growth_factor * history[0]
    return SizeConditionReport(best, tuple(history), growing, ex)


# ---------------------------------------------------------------------------
# boundedness experiment on weighted Morrey spaces


def indicator_family(ctx: HeisenbergContext, m: int, members: int = 20, seed: int = DEFAULT_SEED) -> list:
    """``members`` tuples of ball and annulus indicators with random radii."""
    rng = generator(seed, KEY_EXP, 0)
    out = []
    for k in range(members):
        fs = []
        for _ in range(m):
            a = float(np.exp(rng.uniform(-2.0, 1.0)))
            if k % 2 == 0:
                fs.append(ball_indicator(a))
            else:
                fs.append(annulus_indicator(a, a * float(np.exp(rng.uniform(0.3, 2.0)))))
        out.append(fs)
    return out


@dataclass(frozen=True)
class ExperimentReport:
    value: float
    per_member: tuple[float, ...]
    refined_value: float | None
    stable: bool | None
    weak: bool


def _image(kernel, fs, cfg) -> TestFunction:
    lo = min(f.support[0] for f in fs)
    hi = max(f.support[1] for f in fs)
    lo = max(lo, 1e-3 * hi) * 1e-3
    radii = np.geomspace(lo, hi * 1e4, 241)
    brk = sorted({b for f in fs for b in (*f.support, *f.breakpoints) if 0.0 < b < math.inf})
    radii = np.unique(np.concatenate([radii, brk]))
    vals, _ = operator_profile(kernel, fs, radii, cfg)
    g = sampled_profile(radii, vals, label=f"{kernel.name} image")
    return g


def morrey_boundedness_experiment(
    kernel: MultilinearKernel,
    vw: VectorWeight,
    kappa: float,
    family: Sequence[Sequence[TestFunction]] | None = None,
    search=None,
    cfg: IntegrationConfig | None = None,
    *,
    refine: bool = True,
) -> ExperimentReport:
    """Largest ``||T f||_{L^{p,kappa}(nu)} / prod ||f_i||_{L^{p_i,kappa}(w_i)}`` over a family.

    ``T f`` is tabulated on a logarithmic radius grid (radial inputs) and
    interpolated.  When some ``p_i = 1`` the numerator uses the weak Morrey
    norm.  With ``refine`` the experiment is repeated on the refined ball
    family and ``stable`` reports whether the two maxima agree within a
    factor 2.
    """
    from .spaces import BallSearchConfig, morrey_weighted_norm, weak_morrey_weighted_norm

    ctx = kernel.ctx
    if vw.m != kernel.m:
        raise DimensionError("kernel arity and number of weights differ")
    cfg = cfg or IntegrationConfig()
    search = search or BallSearchConfig(radius_count=7, center_count=3, mc_samples=1 << 13)
    family = family if family is not None else indicator_family(ctx, kernel.m)
    weak = min(vw.ps) == 1.0

    def run(sc):
        ratios = []
        for fs in family:
            if any(f.is_zero for f in fs):
                ratios.append(0.0)
                continue
            g = _image(kernel, fs, cfg)
            if weak:
                num = weak_morrey_weighted_norm(g, ctx, vw.p, kappa, vw.nu, sc, cfg).value
            else:
                num = morrey_weighted_norm(g, ctx, vw.p, kappa, vw.nu, sc, cfg).value
            den = 1.0
            for f, wi, pi in zip(fs, vw.weights, vw.ps):
                den *= morrey_weighted_norm(f, ctx, pi, kappa, wi, sc, cfg).value
            if not (math.isfinite(num) and den > 0.0):
                raise DivergenceError("Morrey norms in the experiment are not finite")
            ratios.append(num / den)
        return ratios

    base = run(search)
    value = max(base) if base else 0.0
    refined = None
    stable = None
    if refine:
        ref = run(search.refined())
        refined = max(ref) if ref else 0.0
        if value == 0.0 and refined == 0.0:
            stable = True
        else:
            lo, hi = sorted((value, refined))
            stable = lo > 0.0 and hi <= 2.0 * lo
    return ExperimentReport(float(value), tuple(base), refined, stable, weak)
