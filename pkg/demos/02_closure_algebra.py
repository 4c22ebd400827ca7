"""Build new systems from old ones with the closure operations.

Sums, products, reciprocals and compositions of systems are again systems.
Each result carries a growth bound and a trace recording where every state
variable came from.

Run with ``python3 demos/02_closure_algebra.py``.
"""
import math

import numpy as np

from gpac.closure import combine, compose, multiply, ode_rewrite, reciprocal
from gpac.pivp import builtin
from gpac.simulator import check_bound, integrate

sin, cos, tanh, exp = (builtin(n) for n in ("sin", "cos", "tanh", "exp"))

pyth = combine(multiply(sin, sin), multiply(cos, cos))
print("sin^2 + cos^2 has", pyth.state_dim, "state variables")
print("value at t = 2:", integrate(pyth, 2.0, 1e-12).final[0])

g = compose(sin, exp)
print("\nsin(exp(t)) at t = 1:", integrate(g, 1.0, 1e-12).final[0], "vs", math.sin(math.e))
print("its growth bound at alpha = 1:", g.bound(np.array([1.0]))[0])
print(g.trace.render())

h = reciprocal(combine(builtin("const", 2), sin))
print("\n1 / (2 + sin t) at t = 1:", integrate(h, 1.0, 1e-12).final[0],
      "vs", 1 / (2 + math.sin(1)))

# the solution of y' = tanh(y), y(0) = 1, as a polynomial system
y = ode_rewrite(tanh, [1])
print("\ny' = tanh(y) rewritten:")
print(y.describe())
print("y(3) =", integrate(y, 3.0, 1e-12).final[0])

report = check_bound(multiply(sin, tanh), -5, 5)
print("\nbound check of sin * tanh on [-5, 5]:", report.summary())
