"""Capacity of the biased perceptron along a few one-dimensional sweeps.

Run with ``python3 demos/capacity_curves.py``.
"""

import numpy as np

from qperceptron import ModelParams, capacity_curve, storage_capacity

# The unbiased, zero-threshold point is the classical value 2.
print("unbiased, kappa_tilde = 0:", storage_capacity(ModelParams(0.0, 0.0)).alpha_c)

# A finite homodyne width raises the effective threshold and lowers capacity.
quantum = ModelParams(0.0, 0.0, kappa=0.0, sigma=0.3, epsilon=0.01)
sol = storage_capacity(quantum)
print(f"sigma = 0.3, eps = 0.01: alpha_c = {sol.alpha_c:.6f}")

# Input bias only matters once the threshold is positive. At m_in = 0 the
# output bias cannot be matched, so that row reports infeasible-bias.
template = ModelParams(0.0, 0.6, kappa=0.0, sigma=0.1)
print("\nm_out = 0.6, sigma = 0.1, sweep m_in")
for row in capacity_curve(template, "m_in", np.round(np.linspace(0, 0.9, 10), 10)):
    print(f"  m_in={row.value:4.2f}  alpha_c={row.alpha_c:9.5f}  {row.status}")

# Output bias helps: sparse outputs are easier to store.
template = ModelParams(0.4, 0.0, kappa=0.3)
print("\nm_in = 0.4, kappa = 0.3, sweep m_out")
for row in capacity_curve(template, "m_out", [0.0, 0.3, 0.6, 0.9, 0.99, 0.999]):
    print(f"  m_out={row.value:5.3f}  alpha_c={row.alpha_c:9.5f}  {row.status}")
