"""
Morrey norms over a family of balls
===================================

Single-ball quantities, the supremum over a ball search, and the sharp
Hardy constant between Morrey spaces.
"""

from hsharp import (
    BallSearchConfig,
    BallSpec,
    ExponentSystem,
    HeisenbergContext,
    MorreySystem,
    ball_indicator,
    extremizer_lower_bound,
    hardy_kernel,
    lp_norm,
    morrey_ball_quantity,
    morrey_constant,
    morrey_weighted_norm,
    power_weight,
    unit_weight,
    weak_lp_norm,
)

ctx = HeisenbergContext(1)
f = ball_indicator(1.0)

print("||chi||_2 =", lp_norm(f, 2.0, ctx).value, " weak:", weak_lp_norm(f, 2.0, ctx).value)

# |B|^(-1/4) ||chi||_{L^2(B)}: grows until B covers the support, then decays
one = unit_weight()
for R in (0.5, 1.0, 2.0, 8.0):
    val, _ = morrey_ball_quantity(f, ctx, BallSpec.centered(ctx, R), 2.0, one, one, 0.25)
    print(f"per-ball quantity on B(0,{R}): {val:.6f}")

search = BallSearchConfig(radius_count=7, center_count=3, mc_samples=1 << 12)
norm = morrey_weighted_norm(f, ctx, 2.0, 0.5, power_weight(0.5), search)
print("weighted Morrey norm", norm.value, "attained near", norm.argmax)

sys = ExponentSystem.from_morrey(MorreySystem([2.0], [-0.25]))
k = hardy_kernel(ctx, 1)
print("Hardy Morrey constant:", morrey_constant(k, sys).value)
for eps in (1e-1, 1e-2):
    print(f"  extremizer eps={eps}:", extremizer_lower_bound(k, sys, eps, 1e6).value)
