"""
The Heisenberg group in a few lines
===================================

Points, the group law, dilations and the gauge norm on H^1.
"""

import numpy as np

from hsharp import HeisenbergContext, GroupPoint, ball_volume, dilate, distance, group_inv, group_mul, hnorm
from hsharp.heisenberg import hnorm_array, sample_ball
from hsharp.rng import generator

ctx = HeisenbergContext(1)
print("homogeneous dimension Q =", ctx.Q)

x = GroupPoint([1.0, 0.0, 0.0], ctx)
y = GroupPoint([0.0, 1.0, 0.0], ctx)

# the law is not commutative: the last coordinate picks up a twist
print("x*y =", group_mul(x, y))
print("y*x =", group_mul(y, x))
print("x * x^-1 =", group_mul(x, group_inv(x)))

# dilations scale the gauge norm linearly
z = GroupPoint([0.3, -0.7, 2.0], ctx)
for r in (0.5, 2.0, 10.0):
    print(f"|d_{r} z| / |z| = {hnorm(dilate(r, z)) / hnorm(z):.12f}")

# the distance is left invariant
g = GroupPoint([5.0, 1.0, -3.0], ctx)
print("d(x, y) =", distance(x, y), " d(gx, gy) =", distance(group_mul(g, x), group_mul(g, y)))

# the unit ball sits inside the cube [-1, 1]^3; hit-or-miss against its volume.
# Haar measure here is twice Lebesgue measure, hence the extra factor 2
box = generator(1, 0).uniform(-1.0, 1.0, size=(200000, 3))
inside = np.mean(hnorm_array(box, 1) < 1.0)
print("unit ball volume:", ball_volume(ctx, 1.0), " cube estimate:", 2 * 8 * inside)
print("volume at r=3 over r=1:", ball_volume(ctx, 3.0) / ball_volume(ctx, 1.0), "= 3^Q")

# uniform samples in a ball stay inside it
pts = sample_ball(ctx, np.zeros(3), 2.0, 5, generator(1, 1))
print("sampled gauge radii:", np.round(hnorm_array(pts, 1), 3))
