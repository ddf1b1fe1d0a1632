"""
Muckenhoupt diagnostics for power weights
=========================================

A_p, reverse Holder and doubling for |x|^a, and what happens when a leaves
the admissible window.
"""

from hsharp import (
    BallSearchConfig,
    BallSpec,
    HeisenbergContext,
    VectorWeight,
    ap_characteristic,
    doubling_check,
    multiweight_product_check,
    power_weight,
    reverse_holder_check,
    vector_ap_characteristic,
)
from hsharp.errors import DivergenceError

ctx = HeisenbergContext(1)
centered = [BallSpec.centered(ctx, r) for r in (0.01, 1.0, 100.0)]
mixed = BallSearchConfig(radius_count=4, center_count=3).balls(ctx)

w = power_weight(1.0)
print("A_2(|x|) centered:", ap_characteristic(w, 2.0, centered).value, "(16/15 =", 16 / 15, ")")
print("A_2(|x|) mixed balls:", ap_characteristic(w, 2.0, mixed).value)
print("RH_2:", reverse_holder_check(w, 2.0, centered).value)
print("doubling at lambda=2:", doubling_check(w, 2.0, [2.0], centered).value)

# |x|^5 is outside -Q < a < Q(p-1) for p = 2
bad = power_weight(5.0)
try:
    ap_characteristic(bad, 2.0, centered)
except DivergenceError as exc:
    print("raise mode:", exc)
rep = ap_characteristic(bad, 2.0, centered, on_divergence="flag")
print("flag mode, growth as the origin is approached:", [f"{g:.3g}" for g in rep.growth])

vw = VectorWeight([w, power_weight(-1.0)], [4.0, 2.0])
print("vector A_P:", vector_ap_characteristic(vw, centered).value)
print("product ratio:", multiweight_product_check(vw, centered).value)
