"""Approximate a staircase and a square wave by generable functions.

Pieces that are approximable on intervals glue into an approximable piecewise
function; a function approximable on one period extends to a periodic one.
The error is at most ``e^-mu`` at every point at distance ``1/lambda`` or more
from a jump.

Run with ``python3 demos/05_staircase_and_square_wave.py``.
"""
import math

import numpy as np

from gpac.zoo import GRID_X, square_wave, staircase

for F in (staircase(), square_wave()):
    print(f"{F.name}: jumps at {F.exceptions.describe()}")
    for mu in (2, 4, 6):
        for lam in (4, 8):
            err = F.max_error(GRID_X, mu, lam)
            print(f"  mu={mu} lambda={lam}: max error {err:.2e}  (allowed {math.exp(-mu):.2e})")

F = square_wave()
xs = np.linspace(-2, 2, 17)
print("\nsquare wave with mu=4, lambda=8:")
for x, y in zip(xs, F.approx(xs, 4, 8)):
    bar = "#" * int(round(10 * (y + 1)))
    print(f"  {x:5.2f} {y:8.4f} {bar}")
