"""Composite Gauss-Legendre machinery in the logarithmic radial variable.

Every radial integral in the package is written in ``u = log r``.  A power
singularity ``r^s`` at 0 or infinity then becomes an exponential in ``u``,
which panel Gauss-Legendre rules integrate to near machine precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError

Vectorized = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and panel settings for radial quadrature.

    ``growth_factor`` and ``divergence_window`` control divergence
    detection: a tail whose successive chunk contributions fail to shrink by
    at least ``1/growth_factor`` for ``divergence_window`` chunks in a row is
    declared divergent.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    order: int = 12
    max_panels: int = 4000
    chunk: float = 8.0
    u_cap: float = 600.0
    growth_factor: float = 1.0005
    divergence_window: int = 3
    nested_order: int = 16
    nested_h0: float = 0.25


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float

    def __iter__(self):
        yield self.value
        yield self.error

    def __float__(self) -> float:
        return float(self.value)


@lru_cache(maxsize=None)
def leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule on the panels ``edges[k]..edges[k+1]``.

    ``edges`` may carry leading batch dimensions; panels run along the last axis.
    """
    x, w = leggauss(order)
    a = edges[..., :-1, None]
    b = edges[..., 1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x
    weights = half * w
    shape = nodes.shape[:-2] + (nodes.shape[-2] * nodes.shape[-1],)
    return nodes.reshape(shape), weights.reshape(shape)


def _panel_estimates(g: Vectorized, a: np.ndarray, b: np.ndarray, order: int):
    x, w = leggauss(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    # one coarse rule on the panel and two on its halves
    pts = np.concatenate(
        [
            mid[:, None] + half[:, None] * x,
            (a + 0.5 * half)[:, None] + 0.5 * half[:, None] * x,
            (mid + 0.5 * half)[:, None] + 0.5 * half[:, None] * x,
        ],
        axis=1,
    )
    vals = np.asarray(g(pts.ravel()), dtype=float).reshape(pts.shape)
    k = len(x)
    coarse = half * (vals[:, :k] @ w)
    fine = 0.5 * half * (vals[:, k : 2 * k] @ w + vals[:, 2 * k :] @ w)
    return coarse, fine


def adaptive_gl(
    g: Vectorized, edges: Sequence[float], cfg: QuadratureConfig, tol_abs: float | None = None
) -> QuadResult:
    """Globally adaptive panel Gauss-Legendre over ``[edges[0], edges[-1]]``.

    ``edges`` are the initial panel boundaries (kinks of the integrand must be
    among them).  Panels whose coarse/fine discrepancy dominates the error
    budget are bisected until the budget is met.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2 or edges[-1] <= edges[0]:
        return QuadResult(0.0, 0.0)
    a = edges[:-1].copy()
    b = edges[1:].copy()
    keep = b > a
    a, b = a[keep], b[keep]
    done_val = 0.0
    done_err = 0.0
    while True:
        coarse, fine = _panel_estimates(g, a, b, cfg.order)
        if not (np.all(np.isfinite(coarse)) and np.all(np.isfinite(fine))):
            raise DivergenceError("non-finite integrand values encountered")
        err = np.abs(fine - coarse)
        total = done_val + fine.sum()
        budget = max(cfg.rel_tol * abs(total), cfg.abs_tol if tol_abs is None else tol_abs)
        if done_err + err.sum() <= budget or a.size > cfg.max_panels:
            return QuadResult(float(total), float(done_err + err.sum()))
        # retire panels that are already negligible, split the rest
        share = budget * (b - a) / max((edges[-1] - edges[0]), 1e-300)
        ok = err <= 0.5 * share
        done_val += fine[ok].sum()
        done_err += err[ok].sum()
        a, b = a[~ok], b[~ok]
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        order = np.argsort(a)
        a, b = a[order], b[order]


def tail_sum(
    g: Vectorized,
    start: float,
    direction: int,
    reference: float,
    cfg: QuadratureConfig,
    rate_hint: float | None = None,
) -> QuadResult:
    """Integrate ``g`` from ``start`` to ``direction * infinity`` in chunks.

    Chunks of length ``cfg.chunk`` are accumulated until their contribution is
    negligible relative to ``reference`` plus the running sum.  Once the
    contributions decay geometrically (as they do for power-law tails) the
    remainder is added in closed form.  ``rate_hint`` is the known decay rate
    of ``g`` in ``u``; when the observed chunk ratio matches it, the closed
    form uses the hinted rate.
    """
    L = cfg.chunk
    total = 0.0
    err = 0.0
    incs: list[float] = []
    u = start
    non_shrinking = 0
    while abs(u) < cfg.u_cap:
        lo, hi = (u, u + L) if direction > 0 else (u - L, u)
        piece = adaptive_gl(g, [lo, hi], cfg)
        total += piece.value
        err += piece.error
        u = hi if direction > 0 else lo
        d = abs(piece.value)
        scale = abs(reference + total)
        budget = max(cfg.rel_tol * scale, cfg.abs_tol)
        if incs:
            prev = incs[-1]
            if prev > 0.0 and d >= prev / cfg.growth_factor and d > budget:
                non_shrinking += 1
                if non_shrinking >= cfg.divergence_window:
                    raise DivergenceError(
                        f"radial integral diverges towards {'infinity' if direction > 0 else 'zero'}"
                        f" (tail chunks stopped shrinking at u={u:.3g})"
                    )
            else:
                non_shrinking = 0
        incs.append(d)
        if d <= 0.1 * budget:
            return QuadResult(total, err + d)
        if len(incs) >= 3 and incs[-2] > 0.0 and incs[-3] > 0.0:
            r1 = incs[-1] / incs[-2]
            r0 = incs[-2] / incs[-3]
            if r1 * cfg.growth_factor < 1.0 and abs(r1 - r0) <= 1e-3 * max(r1, 1e-300):
                rho = r1
                if rate_hint is not None and rate_hint > 0.0:
                    hinted = math.exp(-rate_hint * L)
                    if abs(hinted - r1) <= 1e-3 * r1:
                        rho = hinted
                rest = piece.value * rho / (1.0 - rho)
                return QuadResult(total + rest, err + abs(rest) * abs(r1 - r0) / max(1.0 - rho, 1e-12) + 0.1 * budget)
    raise DivergenceError(
        f"radial integral did not converge before |log r| = {cfg.u_cap:g}"
    )


def graded_edges(a: float, b: float, h0: float, grade_a: bool = True, grade_b: bool = True) -> np.ndarray:
    """Panel edges on ``[a, b]`` that double in size away from the graded ends."""
    length = b - a
    if length <= 0.0:
        return np.array([a, b])
    if grade_a and grade_b:
        left = graded_edges(a, a + 0.5 * length, h0, True, False)
        right = graded_edges(a + 0.5 * length, b, h0, False, True)
        return np.concatenate([left, right[1:]])
    steps = [0.0]
    h = h0
    while steps[-1] + h < length:
        steps.append(steps[-1] + h)
        h *= 2.0
    if length - steps[-1] < 0.5 * (h / 2.0) and len(steps) > 1:
        steps[-1] = length
    else:
        steps.append(length)
    s = np.asarray(steps)
    return a + s if grade_a else b - s[::-1]
