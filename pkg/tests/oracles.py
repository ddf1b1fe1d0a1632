import math

import numpy as np


def im_direct(alpha, betas, panels=60, order=8):
    """Tensor Gauss rule for int (1 + sum t)^-alpha prod t_i^-beta_i dt in t = e^v."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-40.0, 40.0, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    v = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    wv = (0.5 * (b - a) * w).ravel()
    m = len(betas)
    if m == 1:
        return float(np.sum(wv * (1 + np.exp(v)) ** -alpha * np.exp((1 - betas[0]) * v)))
    rest = np.meshgrid(*([v] * (m - 1)), indexing="ij", sparse=True)
    rw = np.meshgrid(*([wv] * (m - 1)), indexing="ij", sparse=True)
    s_rest = sum(np.exp(g) for g in rest)
    fac = 1.0
    for g, bb, ww in zip(rest, betas[1:], rw):
        fac = fac * np.exp((1 - bb) * g) * ww
    total = 0.0
    # slice the first axis to keep memory bounded
    for v0, w0 in zip(v, wv):
        total += w0 * math.exp((1 - betas[0]) * v0) * float(np.sum((1 + math.exp(v0) + s_rest) ** -alpha * fac))
    return total
