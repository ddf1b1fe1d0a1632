"""Sharp operator-norm constants and their numerical oracles.

For a kernel homogeneous of degree ``-Qm`` and invariant under rotations,
the norm of the operator from ``L^{p_1} x ... x L^{p_m}`` (optionally with
power weights) to ``L^p`` equals the integral of ``K(e_1, y)`` against
``prod |y_j|^{s_j}`` for explicit exponents ``s_j``.  This module evaluates
those integrals in closed form where one exists, numerically through the
exact radial reduction otherwise, and from below through perturbed
truncated power functions whose norm ratios approach the constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._quadrature import composite_rule
from .errors import (
    DivergenceError,
    DomainError,
    InfiniteConstantError,
    InternalConsistencyError,
    PreconditionError,
)
from .heisenberg import HeisenbergContext, e1, integrate_radial
from .kernels import (
    IntegrationConfig,
    MultilinearKernel,
    TestFunction,
    _fractions,
    apply_operator,
    operator_profile,
    power_function,
)
from .special import ImParams, gamma_fn, i_m_closed

__all__ = [
    "ConstantResult",
    "ExponentSystem",
    "MorreySystem",
    "closed_form_constant",
    "extremizer_lower_bound",
    "generic_constant",
    "hardy_morrey_sharp",
    "hardy_sharp",
    "hilbert_sharp",
    "hlp_constant_by_regions",
    "hlp_sharp",
    "morrey_constant",
    "norm_ratio",
]

_TAIL_DEPTH = 45.0


@dataclass(frozen=True)
class MorreySystem:
    """Exponents of the two-power-weight Morrey setting.

    Inputs live in ``L^{q_j, lam_j}(|x|^alpha, |x|^{q_j gamma_j / q})``
    and the output in ``L^{q, lam}(|x|^alpha, |x|^gamma)`` with
    ``1/q = sum 1/q_j`` and ``gamma = sum gamma_j``.  ``lam`` defaults to
    ``q_1 lam_1 / q``, the value for which the constant is sharp.
    """

    qs: tuple[float, ...]
    lams: tuple[float, ...]
    gammas: tuple[float, ...] | None = None
    alpha: float = 0.0
    lam: float | None = None

    def __init__(self, qs, lams, gammas=None, alpha=0.0, lam=None):
        qs = tuple(float(v) for v in qs)
        lams = tuple(float(v) for v in lams)
        gammas = tuple(0.0 for _ in qs) if gammas is None else tuple(float(v) for v in gammas)
        if not (len(qs) == len(lams) == len(gammas)) or not qs:
            raise DomainError("Morrey exponent vectors must be nonempty and of equal length")
        for qj, lj in zip(qs, lams):
            if not qj > 1.0:
                raise DomainError(f"need q_j > 1, got {qj!r}")
            if not (-1.0 / qj <= lj < 0.0):
                raise DomainError(f"need -1/q_j <= lam_j < 0, got lam_j={lj!r} for q_j={qj!r}")
        q = 1.0 / sum(1.0 / v for v in qs)
        if lam is None:
            lam = qs[0] * lams[0] / q
        object.__setattr__(self, "qs", qs)
        object.__setattr__(self, "lams", lams)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "alpha", float(alpha))
        object.__setattr__(self, "lam", float(lam))
        if not (-1.0 / q <= self.lam < 0.0):
            raise DomainError(f"need -1/q <= lam < 0, got lam={self.lam!r} for q={q!r}")

    @property
    def q(self) -> float:
        return 1.0 / sum(1.0 / v for v in self.qs)

    @property
    def gamma(self) -> float:
        return sum(self.gammas)

    @property
    def sharp_regime(self) -> bool:
        """``alpha != -Q`` is checked by callers; here strict lam_j and ``q lam = q_j lam_j``."""
        q = self.q
        return all(-1.0 / qj < lj < 0.0 and abs(q * self.lam - qj * lj) <= 1e-12 for qj, lj in zip(self.qs, self.lams))

    def exponents(self, Q: int) -> tuple[float, ...]:
        """``Q lam_j - gamma_j / q + alpha (lam_j + 1/q_j)``."""
        q = self.q
        return tuple(Q * lj - gj / q + self.alpha * (lj + 1.0 / qj) for qj, lj, gj in zip(self.qs, self.lams, self.gammas))


@dataclass(frozen=True)
class ExponentSystem:
    """Exponents ``p_1..p_m`` with ``1/p = sum 1/p_j``, optional power weights.

    With ``alphas`` the inputs live in ``L^{p_j}(|x|^{alpha_j p_j / p})`` and
    the output in ``L^p(|x|^alpha)`` with ``alpha = sum alpha_j``.
    ``p_j = inf`` is allowed.
    """

    ps: tuple[float, ...]
    p: float
    alphas: tuple[float, ...] | None = None
    morrey: MorreySystem | None = None

    def __init__(self, ps, p=None, alphas=None, morrey=None):
        ps = tuple(float(v) for v in ps)
        if not ps:
            raise DomainError("need at least one exponent")
        for v in ps:
            if not v >= 1.0:
                raise DomainError(f"exponents p_j must be >= 1, got {v!r}")
        inv = sum(1.0 / v for v in ps)
        p_h = math.inf if inv == 0.0 else 1.0 / inv
        if p is None:
            p = p_h
        p = float(p)
        if abs((0.0 if p == math.inf else 1.0 / p) - inv) > 1e-12:
            raise DomainError(f"1/p = {1.0 / p!r} but sum 1/p_j = {inv!r}")
        if alphas is not None:
            alphas = tuple(float(a) for a in alphas)
            if len(alphas) != len(ps):
                raise DomainError("alphas and ps differ in length")
        if morrey is not None and len(morrey.qs) != len(ps):
            raise DomainError("Morrey exponents and ps differ in length")
        object.__setattr__(self, "ps", ps)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "morrey", morrey)

    @classmethod
    def from_morrey(cls, morrey: MorreySystem) -> "ExponentSystem":
        return cls(morrey.qs, morrey=morrey)

    @property
    def m(self) -> int:
        return len(self.ps)

    @property
    def alpha(self) -> float:
        return 0.0 if self.alphas is None else sum(self.alphas)

    def weight_alphas(self) -> tuple[float, ...]:
        return self.alphas if self.alphas is not None else tuple(0.0 for _ in self.ps)

    def check_weights(self, Q: int) -> None:
        """``alpha_j < p Q (1 - 1/p_j)``, the integrability condition at the origin."""
        for pj, aj in zip(self.ps, self.weight_alphas()):
            bound = self.p * Q * (1.0 - 1.0 / pj)
            if not aj < bound:
                raise DivergenceError(f"need alpha_j < pQ(1-1/p_j) = {bound:g}, got {aj:g}")

    def lp_exponents(self, Q: int) -> tuple[float, ...]:
        """``-Q/p_j - alpha_j/p``: the powers the constant integrates ``K(e_1, .)`` against."""
        p = self.p
        return tuple(-Q / pj - aj / p for pj, aj in zip(self.ps, self.weight_alphas()))

    def as_dict(self) -> dict:
        out = {"ps": list(self.ps), "p": self.p}
        if self.alphas is not None:
            out["alphas"] = list(self.alphas)
        if self.morrey is not None:
            mo = self.morrey
            out["morrey"] = {
                "qs": list(mo.qs),
                "lams": list(mo.lams),
                "gammas": list(mo.gammas),
                "alpha": mo.alpha,
                "lam": mo.lam,
            }
        return out


@dataclass(frozen=True)
class ConstantResult:
    value: float
    method: str
    error_estimate: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


def _require_finite_ps(sys: ExponentSystem, what: str) -> None:
    bad = [v for v in sys.ps if v == 1.0]
    if bad:
        raise InfiniteConstantError(f"the {what} constant is infinite when some p_j = 1")


def hardy_sharp(sys: ExponentSystem) -> ConstantResult:
    """``prod p_i / (p_i - 1)``, read as 1 for ``p_i = inf``."""
    _require_finite_ps(sys, "Hardy")
    value = 1.0
    for pi in sys.ps:
        if pi != math.inf:
            value *= pi / (pi - 1.0)
    return ConstantResult(value, "closed-form", 0.0, {"operator": "hardy", **sys.as_dict()})


def hardy_morrey_sharp(ctx: HeisenbergContext, sys: ExponentSystem) -> ConstantResult:
    """``prod Q / (Q + e_j)`` with ``e_j`` the Morrey exponents; each factor is a ball integral."""
    if sys.morrey is None:
        raise DomainError("hardy_morrey_sharp needs Morrey exponents")
    Q = ctx.Q
    value = 1.0
    for e in sys.morrey.exponents(Q):
        if not Q + e > 0.0:
            raise DivergenceError(f"constant diverges at the origin: exponent {e:g} <= -Q = {-Q}")
        value *= Q / (Q + e)
    return ConstantResult(value, "closed-form", 0.0, {"operator": "hardy", "n": ctx.n, **sys.as_dict()})


def hlp_sharp(ctx: HeisenbergContext, sys: ExponentSystem) -> ConstantResult:
    """``m Omega_Q^m p / prod (1 - 1/p_j)``."""
    _require_finite_ps(sys, "Hardy-Littlewood-Polya")
    if sys.p == math.inf:
        raise InfiniteConstantError("the HLP constant needs a finite target exponent p")
    m = sys.m
    value = m * ctx.omega_big**m * sys.p
    for pj in sys.ps:
        value /= 1.0 - 1.0 / pj
    return ConstantResult(value, "closed-form", 0.0, {"operator": "hlp", "n": ctx.n, **sys.as_dict()})


def hilbert_sharp(ctx: HeisenbergContext, sys: ExponentSystem) -> ConstantResult:
    """``Omega_Q^m prod Gamma(1 - 1/p_i) Gamma(1/p) / Gamma(m)``."""
    _require_finite_ps(sys, "Hilbert")
    if sys.p == math.inf:
        raise InfiniteConstantError("the Hilbert constant needs a finite target exponent p")
    if sys.p < 1.0:
        raise DomainError(f"the Hilbert bound is stated for p >= 1, got p = {sys.p!r}")
    m = sys.m
    value = ctx.omega_big**m * gamma_fn(1.0 / sys.p) / gamma_fn(m)
    for pi in sys.ps:
        value *= gamma_fn(1.0 - 1.0 / pi)
    via_im = ctx.omega_big**m * i_m_closed(ImParams(m, [1.0 / pi for pi in sys.ps]))
    return ConstantResult(
        value, "closed-form", abs(value - via_im), {"operator": "hilbert", "n": ctx.n, **sys.as_dict()}
    )


def hlp_constant_by_regions(ctx: HeisenbergContext, sys: ExponentSystem, quad=None) -> ConstantResult:
    """The HLP constant as ``K_0 + K_1 + ... + K_m`` over the regions of ``max``.

    ``K_0`` integrates over ``{all |y_i| <= 1}`` where the kernel at ``e_1``
    is 1; ``K_j`` over ``{|y_j| > 1, |y_j| >= |y_i|}`` where it is
    ``|y_j|^{-Qm}``.  Each region integral is evaluated numerically: ``K_0``
    as a product of radial integrals and ``K_j`` as a radial integral in
    ``r_j`` whose integrand contains the radial integrals over ``|y_i| < r_j``.
    """
    _require_finite_ps(sys, "Hardy-Littlewood-Polya")
    Q, m = ctx.Q, sys.m
    s = [-Q / pj for pj in sys.ps]
    regions = []
    err = 0.0
    k0 = 1.0
    for sj in s:
        res = integrate_radial(ctx, lambda r, sj=sj: r**sj, 0.0, 1.0, quad, powers=(sj, None), vectorized=True)
        k0 *= res.value
        err += res.error / res.value
    regions.append(k0)
    err *= k0
    for j in range(m):
        others = [s[i] for i in range(m) if i != j]

        def inner(r, others=others):
            out = 1.0
            for si in others:
                out *= integrate_radial(ctx, lambda t, si=si: t**si, 0.0, r, quad, powers=(si, None), vectorized=True).value
            return out

        sj = s[j]
        decay = sj - Q * m + sum(Q + si for si in others)
        res = integrate_radial(
            ctx, lambda r: r ** (sj - Q * m) * inner(r), 1.0, math.inf, quad, powers=(None, decay)
        )
        regions.append(res.value)
        err += res.error
    total = float(sum(regions))
    return ConstantResult(total, "quadrature", err, {"operator": "hlp", "regions": regions, "n": ctx.n, **sys.as_dict()})


def _radial_constant(kernel, exponents, cfg, label, sys) -> ConstantResult:
    ctx = kernel.ctx
    fs = [power_function(s) for s in exponents]
    res = apply_operator(kernel, fs, e1(ctx), cfg)
    return ConstantResult(
        float(res.value),
        res.method,
        float(res.error),
        {"operator": kernel.name, "n": ctx.n, "exponents": list(exponents), "kind": label, **sys.as_dict()},
    )


def generic_constant(kernel: MultilinearKernel, sys: ExponentSystem, cfg: IntegrationConfig | None = None) -> ConstantResult:
    """``int K(e_1, y) prod |y_j|^{-Q/p_j - alpha_j/p} dy`` by the kernel's best available path.

    Raises :class:`DivergenceError` when the exponents leave the window in
    which the integral converges.
    """
    if sys.m != kernel.m:
        raise DomainError(f"{kernel.name} kernel is {kernel.m}-linear, exponent system has m={sys.m}")
    Q = kernel.ctx.Q
    if sys.alphas is not None:
        sys.check_weights(Q)
    exps = sys.lp_exponents(Q)
    _diagnose_window(kernel, exps)
    return _radial_constant(kernel, exps, cfg, "lebesgue", sys)


def morrey_constant(kernel: MultilinearKernel, sys: ExponentSystem, cfg: IntegrationConfig | None = None) -> ConstantResult:
    """``int K(e_1, y) prod |y_j|^{Q lam_j - gamma_j/q + alpha(lam_j + 1/q_j)} dy``."""
    if sys.morrey is None:
        raise DomainError("morrey_constant needs Morrey exponents")
    if sys.m != kernel.m:
        raise DomainError(f"{kernel.name} kernel is {kernel.m}-linear, exponent system has m={sys.m}")
    exps = sys.morrey.exponents(kernel.ctx.Q)
    _diagnose_window(kernel, exps)
    return _radial_constant(kernel, exps, cfg, "morrey", sys)


def _diagnose_window(kernel: MultilinearKernel, exps: Sequence[float]) -> None:
    """Reject exponents for which the constant integral is infinite.

    After the radial reduction the integrand behaves like ``r_j^{Q + s_j}``
    near ``r_j = 0`` (in ``log r``) and like
    ``|r|^{degree + sum (Q + s_j)}`` when all radii grow together.
    """
    Q = kernel.ctx.Q
    for s in exps:
        if not Q + s > 0.0:
            raise DivergenceError(f"constant diverges at the origin: exponent {s:g} <= -Q = {-Q}")
    if not kernel.bounded_by_x:
        rate = -kernel.homogeneity_degree - sum(Q + s for s in exps)
        if not rate > 0.0:
            raise DivergenceError(f"constant diverges at infinity: decay rate {rate:g} <= 0")


def closed_form_constant(kernel: MultilinearKernel, sys: ExponentSystem) -> ConstantResult | None:
    """The closed form for the built-in kernels (unweighted Lebesgue case), else ``None``."""
    if sys.alphas is not None and any(a != 0.0 for a in sys.alphas):
        return None
    if sys.morrey is not None:
        return hardy_morrey_sharp(kernel.ctx, sys) if kernel.name == "hardy" else None
    if kernel.name == "hardy":
        return hardy_sharp(sys)
    if kernel.name == "hilbert":
        return hilbert_sharp(kernel.ctx, sys)
    if kernel.name == "hlp":
        return hlp_sharp(kernel.ctx, sys)
    return None


# ---------------------------------------------------------------------------
# norm ratios of radial test tuples


def _rule(marks, lo, hi, grade_lo, grade_hi, h0, G):
    """Composite Gauss rule on ``[lo, hi]`` in log-radius, graded towards every mark."""
    cuts = sorted({lo, hi, *[v for v in marks if lo < v < hi]})
    nodes, weights = [], []
    for k, (a, b) in enumerate(zip(cuts[:-1], cuts[1:])):
        ga = grade_lo if k == 0 else True
        gb = grade_hi if k == len(cuts) - 2 else True
        span = b - a
        P = max(2, int(math.ceil(math.log2(span / (2.0 * h0) + 1.0))))
        edges = a + span * _fractions(P, ga, gb)
        x, w = composite_rule(edges, G)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _refined_max(fun, radii) -> float:
    """Grid maximum of ``fun`` refined by golden-section search in ``log r``.

    Denominators of norm ratios must not be underestimated, otherwise the
    ratio could overshoot the constant it bounds from below.
    """
    vals = [fun(r) for r in radii]
    k = int(np.argmax(vals))
    a = math.log(radii[max(k - 1, 0)])
    b = math.log(radii[min(k + 1, len(radii) - 1)])
    best = vals[k]
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = fun(math.exp(c)), fun(math.exp(d))
    for _ in range(40):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fun(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fun(math.exp(d))
    return max(best, fc, fd)


def _image_table(kernel, fs, out_weight_power, p, marks_extra, cfg):
    """Nodes, weights and values of ``H(f)`` on a log-radius rule covering its support."""
    ctx = kernel.ctx
    Q = ctx.Q
    marks = set(marks_extra)
    lo_f = math.inf
    for f in fs:
        for b in (*f.support, *f.breakpoints):
            if 0.0 < b < math.inf:
                marks.add(math.log(b))
        lo_f = min(lo_f, f.support[0])
    if any(f.support[1] == math.inf for f in fs):
        raise DomainError("norm ratios need compactly supported test functions")
    marks = sorted(marks)
    if kernel.bounded_by_x and lo_f > 0.0:
        lo, glo = math.log(lo_f), True
    else:
        rate = Q + out_weight_power
        if not rate > 0.0:
            raise DivergenceError("output weight is not integrable at the origin")
        lo, glo = marks[0] - _TAIL_DEPTH / rate, False
    rate_hi = -(p * kernel.homogeneity_degree + out_weight_power + Q)
    if not rate_hi > 0.0:
        raise DivergenceError("image of compactly supported data is not p-integrable at infinity")
    hi = marks[-1] + _TAIL_DEPTH / rate_hi
    u, w = _rule(marks, lo, hi, glo, False, cfg.nested_h0, cfg.nested_order)
    vals, errs = operator_profile(kernel, fs, np.exp(u), cfg)
    return u, w, vals, errs


@dataclass(frozen=True)
class RatioResult:
    ratio: float
    error: float
    numerator: float
    denominator: float


def norm_ratio(
    kernel: MultilinearKernel,
    fs: Sequence[TestFunction],
    sys: ExponentSystem,
    cfg: IntegrationConfig | None = None,
    radii: Sequence[float] | None = None,
) -> RatioResult:
    """``||H(f)||_out / prod ||f_j||_in`` for radial, compactly supported ``f_j``.

    Lebesgue spaces carry the power weights of ``sys``; with Morrey exponents
    both norms are maxima over centered balls of radii ``radii``.
    """
    from .spaces import lp_norm, morrey_ball_quantity
    from .measures import BallSpec, power_weight

    cfg = cfg or IntegrationConfig()
    ctx = kernel.ctx
    Q, w = ctx.Q, ctx.omega_small
    if len(fs) != kernel.m:
        raise DomainError(f"{kernel.name} kernel is {kernel.m}-linear, got {len(fs)} functions")
    if any(f.is_zero for f in fs):
        raise PreconditionError("norm ratio is 0/0 when some input vanishes identically")
    if not all(f.is_radial for f in fs):
        raise DomainError("norm ratios are computed for radial test functions")
    mo = sys.morrey
    if mo is None:
        p = sys.p
        alphas = sys.weight_alphas()
        den = 1.0
        den_rel = 0.0
        for f, pj, aj in zip(fs, sys.ps, alphas):
            nv = lp_norm(f, pj, ctx, aj * pj / p, None, cfg)
            if nv.value == 0.0:
                raise PreconditionError("norm ratio is 0/0: an input has zero norm")
            den *= nv.value
            den_rel += nv.error / nv.value
        a = sys.alpha
        u, wt, vals, errs = _image_table(kernel, fs, a, p, (), cfg)
        integrand = w * np.abs(vals) ** p * np.exp((Q + a) * u)
        total = float(np.sum(wt * integrand))
        d_total = float(np.sum(wt * w * p * np.abs(vals) ** (p - 1) * errs * np.exp((Q + a) * u)))
        num = total ** (1.0 / p)
        num_rel = d_total / (p * total) if total > 0 else 0.0
        ratio = num / den
        return RatioResult(ratio, ratio * (num_rel + den_rel), num, den)
    # Morrey spaces over centered balls
    if radii is None:
        raise DomainError("Morrey norm ratios need the radii of the centered ball family")
    radii = np.sort(np.asarray(radii, dtype=float))
    q = mo.q
    den = 1.0
    for f, qj, lj, gj in zip(fs, mo.qs, mo.lams, mo.gammas):
        w1 = power_weight(mo.alpha)
        w2 = power_weight(qj * gj / q)

        def quantity(r, f=f, qj=qj, lj=lj, w1=w1, w2=w2):
            return morrey_ball_quantity(f, ctx, BallSpec.centered(ctx, r), qj, w1, w2, lj + 1.0 / qj, cfg)[0]

        best = _refined_max(quantity, radii)
        if best == 0.0:
            raise PreconditionError("norm ratio is 0/0: an input has zero Morrey norm")
        den *= best
    g = mo.gamma
    u, wt, vals, errs = _image_table(kernel, fs, g, q, np.log(radii), cfg)
    integrand = w * np.abs(vals) ** q * np.exp((Q + g) * u)
    order = np.argsort(u)
    u, wt, integrand, errs, vals = u[order], wt[order], integrand[order], errs[order], vals[order]
    cum = np.cumsum(wt * integrand)
    cum_err = np.cumsum(wt * w * q * np.abs(vals) ** (q - 1) * errs * np.exp((Q + g) * u))
    a = mo.alpha
    if Q + a <= 0.0:
        raise DivergenceError("ball weight |x|^alpha is not integrable at the origin")
    best, best_err = 0.0, 0.0
    for r in radii:
        k = int(np.searchsorted(u, math.log(r)))
        if k == 0:
            continue
        mass = w * r ** (Q + a) / (Q + a)
        val = mass ** (-(mo.lam + 1.0 / q)) * cum[k - 1] ** (1.0 / q)
        if val > best:
            best = val
            best_err = val * cum_err[k - 1] / (q * cum[k - 1])
    ratio = best / den
    return RatioResult(ratio, best_err / den, best, den)


def extremizer_lower_bound(
    kernel: MultilinearKernel,
    sys: ExponentSystem,
    epsilon: float,
    R: float,
    cfg: IntegrationConfig | None = None,
    constant: float | None = None,
    tolerance: float = 1e-6,
) -> ConstantResult:
    """Norm ratio of the perturbed, truncated power family.

    Lebesgue case: ``f_j = |x|^{-(Q/p_j + alpha_j/p) - epsilon}`` on
    ``1 <= |x| <= R``.  Morrey case: ``f_j = |x|^{e_j - epsilon}`` on the same
    shell, with ``e_j`` the exponents of :meth:`MorreySystem.exponents`, and
    norms taken over centered balls with radii from ``R^-1`` to ``10 R``.

    The ratio is a lower bound for the operator norm.  If it exceeds
    ``constant`` (default: the closed form or :func:`generic_constant`) by
    more than ``tolerance`` plus its own error estimate, the integration
    machinery disagrees with itself and :class:`InternalConsistencyError` is
    raised.
    """
    eps = float(epsilon)
    R = float(R)
    if not (eps > 0.0 and math.isfinite(eps)):
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    if not (R > 1.0 and math.isfinite(R)):
        raise DomainError(f"truncation R must exceed 1, got {R!r}")
    cfg = cfg or IntegrationConfig()
    ctx = kernel.ctx
    Q = ctx.Q
    radii = None
    if sys.morrey is None:
        base = sys.lp_exponents(Q)
    else:
        base = sys.morrey.exponents(Q)
        per_decade = 6
        decades = math.log10(10.0 * R) - math.log10(1.0 / R)
        radii = np.geomspace(1.0 / R, 10.0 * R, max(8, int(per_decade * decades) + 1))
    fs = [power_function(s - eps, 1.0, R) for s in base]
    rr = norm_ratio(kernel, fs, sys, cfg, radii)
    if constant is None:
        cf = closed_form_constant(kernel, sys)
        if cf is None:
            cf = morrey_constant(kernel, sys, cfg) if sys.morrey is not None else generic_constant(kernel, sys, cfg)
        constant = cf.value
    if rr.ratio > constant * (1.0 + tolerance) + rr.error:
        raise InternalConsistencyError(
            f"extremizer ratio {rr.ratio!r} exceeds the constant {constant!r}"
            f" (error estimate {rr.error:.3g}); the integration paths disagree"
        )
    meta = {
        "operator": kernel.name,
        "n": ctx.n,
        "epsilon": eps,
        "R": R,
        "constant": constant,
        "gap": constant - rr.ratio,
        "numerator": rr.numerator,
        "denominator": rr.denominator,
        **sys.as_dict(),
    }
    return ConstantResult(rr.ratio, "extremizer-lower-bound", rr.error, meta)
