"""
How close do truncated powers get?
==================================

Lower bounds on operator norms from power functions cut off at eps and R.
The gap to the sharp constant shrinks as the window widens.
"""

from hsharp import (
    ExponentSystem,
    HeisenbergContext,
    IntegrationConfig,
    closed_form_constant,
    extremizer_lower_bound,
    hardy_kernel,
    hlp_kernel,
)

ctx = HeisenbergContext(1)
sys = ExponentSystem([2.0])
k = hardy_kernel(ctx, 1)

print(" eps       R      ratio      gap")
for eps, R in ((1e-1, 1e2), (1e-2, 1e4), (1e-3, 1e6), (1e-4, 1e8)):
    r = extremizer_lower_bound(k, sys, eps, R)
    print(f"{eps:7.0e} {R:7.0e}  {r.value:.6f}  {2.0 - r.value:.6f}")

# bilinear case; a coarser quadrature rule is plenty for a lower bound
fast = IntegrationConfig(nested_order=10, nested_h0=0.5)
sys2 = ExponentSystem([4.0, 4.0])
k2 = hlp_kernel(ctx, 2)
C = closed_form_constant(k2, sys2).value
for eps, R in ((0.3, 10.0), (0.1, 1e2)):
    r = extremizer_lower_bound(k2, sys2, eps, R, fast)
    print(f"hlp (4,4) eps={eps}: ratio {r.value:.3f} of {C:.3f}")
