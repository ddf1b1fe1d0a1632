"""Gamma and Beta functions and the I_m integral family.

``I_m(alpha; beta_1..beta_m)`` is the m-fold integral

    int_0^inf ... int_0^inf  t_1^-beta_1 ... t_m^-beta_m / (1 + t_1 + ... + t_m)^alpha  dt

which is what the multilinear Hilbert constant reduces to after polar
coordinates and the substitution t = r^Q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DivergenceError, DomainError, PoleError

__all__ = [
    "ImParams",
    "beta_fn",
    "gamma_fn",
    "i_m_closed",
    "i_m_recursive",
]

# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def gamma_fn(x: float) -> float:
    """Euler's Gamma function for real ``x``.

    Lanczos series for ``x >= 1/2`` and the reflection formula
    ``Gamma(x) Gamma(1-x) = pi / sin(pi x)`` below that.

    Raises
    ------
    PoleError
        If ``x`` is zero or a negative integer.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma_fn needs a finite argument, got {x!r}")
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x!r}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    if x == math.floor(x) and x <= 21.0:
        # exact factorials where the float grid allows it
        return float(math.factorial(int(x) - 1))
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    # split the power to postpone overflow for large x
    half = t ** ((z + 0.5) / 2.0)
    return _SQRT_2PI * half * (half * math.exp(-t)) * acc


def beta_fn(a: float, b: float) -> float:
    """Euler Beta function ``B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)`` for a, b > 0."""
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"beta_fn needs positive arguments, got ({a!r}, {b!r})")
    return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b)


@dataclass(frozen=True)
class ImParams:
    """Exponents of ``I_m(alpha; beta_1..beta_m)``.

    The integral converges iff every ``beta_i < 1`` and
    ``alpha - m + sum(beta) > 0``; :meth:`check` raises otherwise.
    """

    alpha: float
    betas: tuple[float, ...]

    def __init__(self, alpha: float, betas: Sequence[float]):
        object.__setattr__(self, "alpha", float(alpha))
        object.__setattr__(self, "betas", tuple(float(b) for b in betas))
        if not self.betas:
            raise DomainError("I_m needs at least one beta exponent")

    @property
    def m(self) -> int:
        return len(self.betas)

    @property
    def gamma_argument(self) -> float:
        return self.alpha - self.m + sum(self.betas)

    def check(self) -> None:
        bad = [b for b in self.betas if not b < 1.0]
        if bad:
            raise DivergenceError(f"I_m diverges at t=0: beta >= 1 in {self.betas}")
        if not self.gamma_argument > 0.0:
            raise DivergenceError(
                f"I_m diverges at infinity: alpha - m + sum(beta) = {self.gamma_argument!r} <= 0"
            )


def i_m_closed(params: ImParams) -> float:
    """Closed form ``prod Gamma(1 - beta_i) * Gamma(alpha - m + sum beta) / Gamma(alpha)``."""
    params.check()
    value = gamma_fn(params.gamma_argument) / gamma_fn(params.alpha)
    for b in params.betas:
        value *= gamma_fn(1.0 - b)
    return value


def i_m_recursive(params: ImParams) -> float:
    """Evaluate ``I_m`` by peeling off the last variable.

    ``I_m(a; b_1..b_m) = B(1 - b_m, a + b_m - 1) * I_{m-1}(a - 1 + b_m; b_1..b_{m-1})``
    with ``I_1(a; b) = B(1 - b, a + b - 1)``.
    """
    params.check()
    alpha = params.alpha
    value = 1.0
    for b in reversed(params.betas):
        value *= beta_fn(1.0 - b, alpha + b - 1.0)
        alpha = alpha - 1.0 + b
    return value
