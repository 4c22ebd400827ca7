"""Evaluate a two-input system along paths around the origin.

The circuit in ``fig3.json`` computes ``1 / (x1^2 + x2^2)`` as a function of
two inputs. A multi-input system is evaluated by integrating along a path from
its base point ``(1, 0)``; the value at the end does not depend on the path as
long as it avoids the origin.

Run with ``python3 demos/03_inverse_square_norm.py``.
"""
import math
from pathlib import Path

from gpac.circuit import circuit_deserialize, circuit_to_pivp
from gpac.simulator import DomainError, evaluate

HERE = Path(__file__).parent
f = circuit_to_pivp(circuit_deserialize((HERE / "fig3.json").read_text()))
print(f.describe())

target = [-1.0, 0.5]
paths = {
    "over the top": [[1.0, 1.0], [-1.0, 1.0]],
    "under the bottom": [[1.0, -1.0], [-1.0, -1.0]],
    "a wide dogleg": [[3.0, 0.0], [3.0, -3.0], [-3.0, -3.0], [-3.0, 2.0]],
}
exact = 1 / (target[0] ** 2 + target[1] ** 2)
print(f"\nvalue at {target}, exact {exact:.15f}")
for name, path in paths.items():
    got = evaluate(f, target, 1e-12, path=path)[0]
    print(f"  {name:>18}: {got:.15f}  error {abs(got - exact):.1e}")

try:
    evaluate(f, target)
except DomainError as exc:
    print("\nwithout a path:", exc)

print("\nalong the unit circle the value stays 1:")
for k in range(1, 5):
    a = k * math.pi / 2
    path = [[math.cos(a * j / 8), math.sin(a * j / 8)] for j in range(1, 9)]
    print(f"  angle {a:5.3f}: {evaluate(f, path[-1], 1e-12, path=path[:-1])[0]:.12f}")
