"""Tour the smooth approximations of sign, rounding, absolute value and max.

Each function takes a precision ``mu`` and a sharpness ``lambda``. The error
bound holds away from the discontinuities. The inequality suite checks every
bound on a grid of about 800 inputs and every parameter combination.

Run with ``python3 demos/04_zoo_tour.py``.
"""
import numpy as np

from gpac.zoo import ZOO, check_all_inequalities

xs = np.array([-2.0, -0.6, -0.1, 0.0, 0.1, 0.6, 2.0])
params = {"mu": 4, "lambda": 4}
for name in ("sg", "ip1", "abs", "rnd"):
    z = ZOO[name]
    approx, bound, ok = z.check(xs, params)
    target = z.target(xs, z.params(params))
    print(f"{name}: {z.description}")
    for x, a, r, b in zip(xs, approx, target, bound):
        print(f"  x={x:5.2f}  approx={a:9.5f}  target={r:6.2f}  allowed error={b:.2e}")

print("\ncompiled systems agree with the closed forms near the base point:")
near = np.array([-0.1, 0.0, 0.1])
for name in ("sg", "abs"):
    got = ZOO[name].compiled(near, params)
    print(f"  {name}: {got}  vs  {ZOO[name].check(near, params)[0]}")

print()
for check in check_all_inequalities():
    print(check.line())
