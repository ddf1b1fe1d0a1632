"""
Sharp constants and their oracles
=================================

Closed forms for the Hardy, Hilbert and Hardy-Littlewood-Polya operators,
each set against an independent numerical evaluation.
"""

import dataclasses

from hsharp import (
    ExponentSystem,
    HeisenbergContext,
    IntegrationConfig,
    generic_constant,
    hardy_kernel,
    hardy_sharp,
    hilbert_kernel,
    hilbert_sharp,
    hlp_constant_by_regions,
    hlp_kernel,
    hlp_sharp,
)

ctx = HeisenbergContext(1)

# Hardy: the product of dual exponents, whatever n is
for n, ps in ((1, [2.0]), (1, [4.0, 4.0]), (2, [3.0, 6.0])):
    sys = ExponentSystem(ps)
    k = hardy_kernel(HeisenbergContext(n), len(ps))
    print(f"hardy n={n} p={ps}: closed {hardy_sharp(sys).value:.15f}  radial {generic_constant(k, sys).value:.15f}")

# Hilbert, bilinear: nested quadrature and plain Monte Carlo on the full kernel
sys = ExponentSystem([4.0, 4.0])
k = hilbert_kernel(ctx, 2)
mc = generic_constant(dataclasses.replace(k, factor=None), sys, IntegrationConfig(method="monte-carlo", mc_samples=1 << 19))
print("hilbert (4,4):", hilbert_sharp(ctx, sys).value, generic_constant(k, sys).value, f"MC {mc.value:.3f} +- {mc.error_estimate:.3f}")

# HLP: the region decomposition, and Monte Carlo once three radii are involved
print("hlp (4,4):", hlp_sharp(ctx, sys).value, hlp_constant_by_regions(ctx, sys).value)
s3 = ExponentSystem([6.0, 6.0, 6.0])
res = generic_constant(hlp_kernel(ctx, 3), s3, IntegrationConfig(mc_samples=1 << 20))
print(f"hlp (6,6,6): closed {hlp_sharp(ctx, s3).value:.3f}  {res.method} {res.value:.3f} +- {res.error_estimate:.3f}")

# power weights shift the exponents; Hardy with |x|^1 at p = 2 gives 8/3
print("weighted hardy:", generic_constant(hardy_kernel(ctx, 1), ExponentSystem([2.0], alphas=[1.0])).value)
