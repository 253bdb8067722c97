"""The perceptron as a Gaussian circuit: squeezers and controlled additions.

Run with ``python3 demos/gaussian_circuit.py``.
"""

import numpy as np

from qperceptron.circuit import CircuitSpec, output_marginal, run_perceptron_circuit
from qperceptron.perceptron import classification_probability, classify_outcomes, sample_homodyne

w = np.array([0.8, -1.2, 0.5, 2.0])
x = np.array([1.0, 1.0, -1.0, 1.0])
sigma = 0.4

# Each input is squeezed by its weight then added into the last mode.
state = run_perceptron_circuit(x, CircuitSpec(tuple(w), sigma))
mean, var = output_marginal(state)
print(f"output mode: mean {mean:.6f} (w.x = {w @ x:.6f}), "
      f"variance {var:.6f} (|w|^2 sigma^2 = {w @ w * sigma**2:.6f})")

# The ideal accumulator carries no vacuum noise of its own, so it is a formal
# limit. A finite-width ancilla makes the state physical.
print("ideal state physical:", state.is_physical())
phys = run_perceptron_circuit(x, CircuitSpec(tuple(w), sigma), ancilla_width=0.05)
print("ancilla state physical:", phys.is_physical(), "variance", output_marginal(phys)[1])

# Homodyne readout with a margin kappa: frequency of the correct label.
kappa = 0.2
samples = sample_homodyne(w, x, sigma, seed=0, size=200_000)
freq = np.mean(classify_outcomes(samples, np.linalg.norm(w), kappa) == 1)
print(f"P(correct): sampled {freq:.4f}, exact "
      f"{classification_probability(w, x, 1, kappa, sigma):.4f}")
