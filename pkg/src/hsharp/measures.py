"""Balls, weights and weighted ball integrals.

Integrals over centered balls of radial integrands go through the exact
radial quadrature.  Everything else (off-center balls, non-radial data) is
sampled uniformly from the ball, which is exact for the Haar measure because
``B(a, R) = a o delta_R(B(0, 1))`` and left translation and dilation preserve
uniformity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, DivergenceError, DomainError
from .heisenberg import (
    GroupPoint,
    HeisenbergContext,
    ball_volume,
    dilate,
    hnorm_array,
    integrate_radial,
    origin,
    sample_ball,
)
from .rng import DEFAULT_SEED, generator

__all__ = [
    "BallSpec",
    "Weight",
    "ball_integral",
    "power_weight",
    "product_weight",
    "tabulated_weight",
    "unit_weight",
    "weight_measure",
]


class BallSpec:
    """The gauge ball ``B(center, radius) = {y : d(center, y) < radius}``."""

    __slots__ = ("center", "radius")

    def __init__(self, center: GroupPoint, radius: float):
        radius = float(radius)
        if not (radius > 0.0 and math.isfinite(radius)):
            raise DomainError(f"ball radius must be positive and finite, got {radius!r}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)

    def __setattr__(self, name, value):
        raise AttributeError("BallSpec is immutable")

    @classmethod
    def centered(cls, ctx: HeisenbergContext, radius: float) -> "BallSpec":
        return cls(origin(ctx), radius)

    @property
    def ctx(self) -> HeisenbergContext:
        return self.center.ctx

    @property
    def is_centered(self) -> bool:
        return not np.any(self.center.coords)

    @property
    def volume(self) -> float:
        return ball_volume(self.ctx, self.radius)

    def dilated(self, t: float) -> "BallSpec":
        """``delta_t B(a, R) = B(delta_t a, t R)``."""
        return BallSpec(dilate(t, self.center), t * self.radius)

    def scaled(self, lam: float) -> "BallSpec":
        """Concentric ball ``lambda B = B(a, lambda R)``."""
        return BallSpec(self.center, lam * self.radius)

    def contains_origin(self) -> bool:
        return float(hnorm_array(self.center.coords, self.ctx.n)) < self.radius

    def as_dict(self) -> dict:
        return {"center": [float(c) for c in self.center.coords], "radius": self.radius}

    def __repr__(self) -> str:
        return f"BallSpec(center={self.center.coords.tolist()}, radius={float(self.radius)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, BallSpec) and self.center == other.center and self.radius == other.radius

    def __hash__(self) -> int:
        return hash((self.center, self.radius))


@dataclass(frozen=True, eq=False)
class Weight:
    """A positive weight on H^n.

    ``power`` is set when the weight is exactly ``|x|_h^power``; the closed
    forms for centered balls key off it.  Otherwise ``evaluator`` maps an
    ``(N, 2n+1)`` array to weight values.
    """

    kind: str
    evaluator: Callable[[np.ndarray, int], np.ndarray]
    power: float | None = None
    label: str = ""

    def at_points(self, coords: np.ndarray, n: int) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(coords, dtype=float), n), dtype=float)

    def __call__(self, x: GroupPoint) -> float:
        return float(self.at_points(x.coords[None, :], x.ctx.n)[0])

    @property
    def is_radial(self) -> bool:
        return self.power is not None

    def profile(self, r) -> np.ndarray:
        if self.power is None:
            raise DomainError(f"weight {self.label} is not a pure power")
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return r**self.power if self.power != 0.0 else np.ones_like(r)

    def pow(self, e: float) -> "Weight":
        e = float(e)
        if self.power is not None:
            return power_weight(self.power * e)
        ev = self.evaluator
        return Weight("product", lambda x, n: ev(x, n) ** e, None, f"({self.label})^{e:g}")


def power_weight(a: float) -> Weight:
    a = float(a)

    def ev(x, n):
        r = hnorm_array(x, n)
        if a == 0.0:
            return np.ones_like(r)
        with np.errstate(divide="ignore"):
            return r**a

    return Weight("power", ev, a, f"|x|^{a:g}")


def unit_weight() -> Weight:
    return power_weight(0.0)


def product_weight(weights: Sequence[Weight], exponents: Sequence[float]) -> Weight:
    """``prod_i w_i^(e_i)``; stays a power weight when every factor is one."""
    if len(weights) != len(exponents):
        raise DimensionError("weights and exponents differ in length")
    if all(w.power is not None for w in weights):
        a = sum(w.power * e for w, e in zip(weights, exponents))
        w = power_weight(a)
        return Weight("product", w.evaluator, a, "*".join(f"({v.label})^{e:g}" for v, e in zip(weights, exponents)))
    parts = list(zip(weights, [float(e) for e in exponents]))

    def ev(x, n):
        out = np.ones(x.shape[0])
        for w, e in parts:
            out = out * w.at_points(x, n) ** e
        return out

    return Weight("product", ev, None, "*".join(f"({v.label})^{e:g}" for v, e in parts))


def tabulated_weight(func: Callable[[np.ndarray], np.ndarray], label: str = "tabulated") -> Weight:
    """Weight from a callable on ``(N, 2n+1)`` coordinate arrays."""
    return Weight("tabulated-evaluator", lambda x, n: func(x), None, label)


@dataclass(frozen=True)
class BallIntegral:
    value: float
    error: float
    method: str


def ball_integral(
    ball: BallSpec,
    point_integrand: Callable[[np.ndarray], np.ndarray],
    radial_profile: Callable[[np.ndarray], np.ndarray] | None = None,
    *,
    breakpoints: Sequence[float] = (),
    power_at_zero: float | None = None,
    samples: int = 1 << 16,
    seed: int = DEFAULT_SEED,
    key: tuple[int, ...] = (0,),
    quad=None,
) -> BallIntegral:
    """``int_B F(x) dx`` for a ball ``B``.

    ``radial_profile`` (if given) is ``F`` as a function of ``|x|_h``; it is
    used for centered balls through exact radial quadrature.  Otherwise
    ``point_integrand`` is averaged over uniform samples of the ball and the
    error is three standard errors.
    """
    ctx = ball.ctx
    if radial_profile is not None and ball.is_centered:
        if power_at_zero is not None and power_at_zero + ctx.Q <= 0.0:
            raise DivergenceError(
                f"integrand ~ r^{power_at_zero:g} is not integrable at the origin"
            )
        br = [b for b in breakpoints if 0.0 < b < ball.radius]
        res = integrate_radial(
            ctx, radial_profile, 0.0, ball.radius, quad, breakpoints=br, powers=(power_at_zero, None), vectorized=True
        )
        return BallIntegral(res.value, res.error, "quadrature")
    if power_at_zero is not None and power_at_zero + ctx.Q <= 0.0 and ball.contains_origin():
        raise DivergenceError(f"integrand ~ r^{power_at_zero:g} is not integrable at the origin")
    rng = generator(seed, *key)
    pts = sample_ball(ctx, ball.center.coords, ball.radius, samples, rng)
    vals = np.asarray(point_integrand(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DivergenceError("integrand is not finite on the sampled ball")
    vol = ball.volume
    se = vals.std(ddof=1) / math.sqrt(vals.size) if vals.size > 1 else 0.0
    return BallIntegral(vol * float(vals.mean()), 3.0 * vol * float(se), "monte-carlo")


def weight_measure(
    w: Weight, ball: BallSpec, *, samples: int = 1 << 16, seed: int = DEFAULT_SEED, key: tuple[int, ...] = (0,)
) -> BallIntegral:
    """``w(B) = int_B w``; closed form for power weights on centered balls."""
    ctx = ball.ctx
    Q = ctx.Q
    if w.power is not None and ball.is_centered:
        a = w.power
        if Q + a <= 0.0:
            raise DivergenceError(f"|x|^{a:g} is not integrable at the origin (Q={Q})")
        return BallIntegral(ctx.omega_small * ball.radius ** (Q + a) / (Q + a), 0.0, "closed-form")
    n = ctx.n
    return ball_integral(
        ball,
        lambda x: w.at_points(x, n),
        power_at_zero=w.power,
        samples=samples,
        seed=seed,
        key=key,
    )
