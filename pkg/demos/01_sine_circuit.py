"""Compile the two-integrator sine circuit and simulate it over one period.

The circuit in ``fig2.json`` wires two integrators in a feedback loop through
a multiplier by -1. Compiling it yields the system ``y1' = y2, y2' = -y1``
whose first component is ``sin t``.

Run with ``python3 demos/01_sine_circuit.py``.
"""
import math
from pathlib import Path

import numpy as np

from gpac.circuit import circuit_deserialize, circuit_to_pivp, circuit_validate
from gpac.simulator import integrate

HERE = Path(__file__).parent

circuit = circuit_deserialize((HERE / "fig2.json").read_text())
print("units:", circuit.counts())
print("problems:", circuit_validate(circuit) or "none")

f = circuit_to_pivp(circuit)
print()
print(f.describe())

traj = integrate(f, 2 * math.pi, 1e-10)
print()
print(f"{traj.steps} Taylor steps, orders {traj.order.min()}..{traj.order.max()}")
ts, ys = traj.dense(9)
print(f"{'t':>8} {'simulated':>20} {'sin t':>20}")
for t, y in zip(ts, ys[:, 0]):
    print(f"{t:8.4f} {y:20.15f} {math.sin(t):20.15f}")
ts, ys = traj.dense(100)
print(f"\nmax error over 100 dense points: {np.max(np.abs(ys[:, 0] - np.sin(ts))):.2e}")
