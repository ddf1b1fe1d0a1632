"""Group structure, gauge norm, dilations and Haar measure on the Heisenberg group.

A point of H^n is stored as 2n+1 real coordinates ``(x_1..x_2n, t)``.  The
group law is

    x o y = (x_i + y_i,  t + s + 2 sum_j (y_j x_{n+j} - x_j y_{n+j}))

the gauge norm is ``|x|_h = ((sum x_i^2)^2 + t^2)^(1/4)`` and the dilations
``delta_r`` scale the horizontal coordinates by ``r`` and ``t`` by ``r^2``.

Haar measure normalization
--------------------------
Haar measure is unique up to a constant.  We fix it so that the unit gauge
ball has measure ``Omega_Q = 2 pi^(n+1/2) Gamma(n/2) / ((n+1) Gamma(n) Gamma((n+1)/2))``.
With that normalization the Haar measure is ``haar_density`` (exactly 2)
times Lebesgue measure on R^(2n+1); every Monte-Carlo estimate done in
coordinates multiplies by that density so it agrees with the polar formula
``dx = omega_Q r^(Q-1) dr dsigma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._quadrature import QuadratureConfig, QuadResult, adaptive_gl, tail_sum
from .errors import DimensionError, DomainError
from .special import gamma_fn

__all__ = [
    "GroupPoint",
    "HeisenbergContext",
    "QuadResult",
    "QuadratureConfig",
    "ball_volume",
    "dilate",
    "distance",
    "e1",
    "group_inv",
    "group_mul",
    "hnorm",
    "integrate_radial",
    "origin",
]


@dataclass(frozen=True)
class HeisenbergContext:
    """Dimension data of H^n: ``Q = 2n + 2``, unit-ball volume and sphere measure."""

    n: int
    Q: int = field(init=False)
    omega_big: float = field(init=False)
    omega_small: float = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise DomainError(f"H^n needs a positive integer n, got {self.n!r}")
        n = int(self.n)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "Q", 2 * n + 2)
        big = (
            2.0 * math.pi ** (n + 0.5) * gamma_fn(n / 2.0)
            / ((n + 1) * gamma_fn(n) * gamma_fn((n + 1) / 2.0))
        )
        object.__setattr__(self, "omega_big", big)
        object.__setattr__(self, "omega_small", self.Q * big)

    @property
    def dim(self) -> int:
        """Number of coordinates, 2n+1."""
        return 2 * self.n + 1

    @property
    def lebesgue_unit_ball(self) -> float:
        """Lebesgue volume of ``{|x|_h < 1}`` in R^(2n+1): pi^n B(n/2, 3/2) / Gamma(n)."""
        n = self.n
        return math.pi**n * gamma_fn(n / 2.0) * gamma_fn(1.5) / (gamma_fn(n) * gamma_fn(n / 2.0 + 1.5))

    @property
    def haar_density(self) -> float:
        """Haar measure per unit Lebesgue measure under our normalization."""
        return self.omega_big / self.lebesgue_unit_ball


@dataclass(frozen=True)
class GroupPoint:
    """A point of H^n."""

    coords: np.ndarray
    ctx: HeisenbergContext

    def __init__(self, coords: Sequence[float], ctx: HeisenbergContext):
        arr = np.array(coords, dtype=float).reshape(-1)
        if arr.size != ctx.dim:
            raise DimensionError(f"H^{ctx.n} points have {ctx.dim} coordinates, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("GroupPoint coordinates must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)
        object.__setattr__(self, "ctx", ctx)

    def __repr__(self) -> str:
        return f"GroupPoint({self.coords.tolist()}, n={self.ctx.n})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupPoint)
            and other.ctx.n == self.ctx.n
            and np.array_equal(other.coords, self.coords)
        )

    def __hash__(self) -> int:
        return hash((self.ctx.n, self.coords.tobytes()))


def origin(ctx: HeisenbergContext) -> GroupPoint:
    return GroupPoint(np.zeros(ctx.dim), ctx)


def e1(ctx: HeisenbergContext) -> GroupPoint:
    """The unit vector (1, 0, ..., 0)."""
    c = np.zeros(ctx.dim)
    c[0] = 1.0
    return GroupPoint(c, ctx)


def _same(x: GroupPoint, y: GroupPoint) -> HeisenbergContext:
    if x.ctx.n != y.ctx.n:
        raise DimensionError(f"points live in H^{x.ctx.n} and H^{y.ctx.n}")
    return x.ctx


# Array kernels: the last axis holds the 2n+1 coordinates.


def mul_array(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = x + y
    twist = np.sum(y[..., :n] * x[..., n : 2 * n] - x[..., :n] * y[..., n : 2 * n], axis=-1)
    z[..., 2 * n] = x[..., 2 * n] + y[..., 2 * n] + 2.0 * twist
    return z


def hnorm_array(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    s = np.sum(x[..., : 2 * n] ** 2, axis=-1)
    return np.sqrt(np.sqrt(s * s + x[..., 2 * n] ** 2))


def dilate_array(r, x: np.ndarray, n: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    out = np.array(x, dtype=float, copy=True)
    rr = r[..., None] if r.ndim else r
    out[..., : 2 * n] *= rr
    out[..., 2 * n] *= r * r
    return out


def group_mul(x: GroupPoint, y: GroupPoint) -> GroupPoint:
    ctx = _same(x, y)
    return GroupPoint(mul_array(x.coords, y.coords, ctx.n), ctx)


def group_inv(x: GroupPoint) -> GroupPoint:
    """Inverse element, which for this group law is plain negation."""
    return GroupPoint(-x.coords, x.ctx)


def hnorm(x: GroupPoint) -> float:
    return float(hnorm_array(x.coords, x.ctx.n))


def dilate(r: float, x: GroupPoint) -> GroupPoint:
    if not r > 0.0:
        raise DomainError(f"dilation factor must be positive, got {r!r}")
    return GroupPoint(dilate_array(r, x.coords, x.ctx.n), x.ctx)


def distance(p: GroupPoint, q: GroupPoint) -> float:
    """Left-invariant gauge distance ``|q^-1 p|_h``."""
    ctx = _same(p, q)
    return float(hnorm_array(mul_array(-q.coords, p.coords, ctx.n), ctx.n))


def ball_volume(ctx: HeisenbergContext, r: float) -> float:
    """Haar measure of any ball of radius ``r``: ``Omega_Q r^Q``."""
    if not r > 0.0:
        raise DomainError(f"ball radius must be positive, got {r!r}")
    return ctx.omega_big * r**ctx.Q


def _as_vectorized(profile: Callable, vectorized: bool) -> Callable[[np.ndarray], np.ndarray]:
    if vectorized:
        return lambda r: np.asarray(profile(r), dtype=float)
    vf = np.vectorize(lambda r: float(profile(float(r))), otypes=[float])
    return vf


def integrate_radial(
    ctx: HeisenbergContext,
    profile: Callable,
    r_min: float = 0.0,
    r_max: float = math.inf,
    quad: QuadratureConfig | None = None,
    *,
    breakpoints: Sequence[float] = (),
    powers: tuple[float | None, float | None] = (None, None),
    vectorized: bool = False,
) -> QuadResult:
    """Integrate a radial function over the shell ``r_min <= |x|_h <= r_max``.

    Returns ``omega_Q * int profile(r) r^(Q-1) dr`` with an error estimate.
    The integral is computed in ``u = log r`` (equivalently ``log r^Q / Q``),
    which removes power singularities at 0 and infinity; kinks of the profile
    should be passed as ``breakpoints``.  ``powers`` optionally gives the
    exponents ``s`` with ``profile(r) ~ r^s`` as ``r -> 0`` and ``r -> inf``;
    they sharpen the closed-form tail.

    Raises
    ------
    DivergenceError
        When the tail contributions stop shrinking as the range is extended.
    """
    cfg = quad or QuadratureConfig()
    if r_min < 0.0 or not r_max > r_min:
        if r_max == r_min:
            return QuadResult(0.0, 0.0)
        raise DomainError(f"need 0 <= r_min < r_max, got ({r_min!r}, {r_max!r})")
    Q = ctx.Q
    w = ctx.omega_small
    prof = _as_vectorized(profile, vectorized)

    def g(u: np.ndarray) -> np.ndarray:
        r = np.exp(u)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            vals = prof(r)
            out = vals * np.exp(Q * u)
        out = np.where(vals == 0.0, 0.0, out)
        return w * out

    lo = math.log(r_min) if r_min > 0.0 else -math.inf
    hi = math.log(r_max) if math.isfinite(r_max) else math.inf
    marks = sorted(
        {math.log(b) for b in breakpoints if b > 0.0 and math.isfinite(b)} | {0.0}
    )
    inner = [m for m in marks if lo < m < hi]
    core_lo = lo if math.isfinite(lo) else (inner[0] if inner else min(hi, 0.0)) - 1.0
    core_hi = hi if math.isfinite(hi) else (inner[-1] if inner else max(lo, 0.0)) + 1.0
    edges = sorted({core_lo, core_hi, *[m for m in inner if core_lo < m < core_hi]})
    # split long finite ranges so each panel starts reasonably small
    fine_edges = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        k = max(1, int(math.ceil((b - a) / cfg.chunk)))
        fine_edges.extend(np.linspace(a, b, k + 1)[1:].tolist())
    core = adaptive_gl(g, fine_edges, cfg)
    value, error = core.value, core.error
    cap = min(cfg.u_cap, 700.0 / (Q + 1.0))
    tcfg = QuadratureConfig(**{**cfg.__dict__, "u_cap": cap})
    s0, sinf = powers
    if not math.isfinite(lo):
        hint = (Q + s0) if s0 is not None else None
        t = tail_sum(g, core_lo, -1, value, tcfg, hint)
        value += t.value
        error += t.error
    if not math.isfinite(hi):
        hint = -(Q + sinf) if sinf is not None else None
        t = tail_sum(g, core_hi, +1, value, tcfg, hint)
        value += t.value
        error += t.error
    return QuadResult(float(value), float(error))


def sample_unit_ball(ctx: HeisenbergContext, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from the unit gauge ball by rejection from a box."""
    out = np.empty((0, ctx.dim))
    accept = ctx.lebesgue_unit_ball / 2.0**ctx.dim
    while out.shape[0] < size:
        need = size - out.shape[0]
        draw = rng.uniform(-1.0, 1.0, size=(int(need / accept * 1.1) + 16, ctx.dim))
        keep = draw[hnorm_array(draw, ctx.n) < 1.0]
        out = np.concatenate([out, keep[:need]])
    return out


def sample_sphere(ctx: HeisenbergContext, size: int, rng: np.random.Generator, antithetic: bool = True) -> np.ndarray:
    """Samples from the normalized polar surface measure on ``{|x|_h = 1}``.

    If ``y`` is uniform in the unit ball then ``delta_{1/|y|} y`` is
    distributed exactly as the normalized surface measure of the polar
    decomposition.  With ``antithetic`` the samples come in adjacent pairs
    ``(xi, -xi)``, so odd functions average to exactly zero over any
    even-length slice.
    """
    half = (size + 1) // 2 if antithetic else size
    y = sample_unit_ball(ctx, half, rng)
    r = hnorm_array(y, ctx.n)
    xi = dilate_array(1.0 / r, y, ctx.n)
    if antithetic:
        xi = np.stack([xi, -xi], axis=1).reshape(-1, ctx.dim)[:size]
    return xi


def sample_ball(
    ctx: HeisenbergContext, center: np.ndarray, radius: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniform samples from ``B(center, radius) = center o delta_radius(B(0, 1))``."""
    y = dilate_array(radius, sample_unit_ball(ctx, size, rng), ctx.n)
    return mul_array(np.broadcast_to(center, y.shape), y, ctx.n)
