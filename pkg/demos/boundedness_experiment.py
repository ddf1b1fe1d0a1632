"""
A bilinear Hardy operator on weighted Morrey spaces
===================================================

Ratio of output to input Morrey norms over a family of indicator tuples,
once with strong inputs and once with an L^1 input.  Each run also
repeats on a finer ball search to see whether the ratio is stable.
This takes about a minute.
"""

from hsharp import HeisenbergContext, VectorWeight, hardy_kernel, indicator_family, morrey_boundedness_experiment, unit_weight

ctx = HeisenbergContext(1)
k = hardy_kernel(ctx, 2)
family = indicator_family(ctx, 2, members=8)

for ps in ([4.0, 4.0], [1.0, 2.0]):
    vw = VectorWeight([unit_weight(), unit_weight()], ps)
    rep = morrey_boundedness_experiment(k, vw, 0.5, family=family)
    print(f"p={ps}: ratio {rep.value:.4f}  refined {rep.refined_value:.4f}  stable {rep.stable}  weak {rep.weak}")
