"""Finite-N feasibility transition compared with the theoretical capacity.

Run with ``python3 demos/monte_carlo.py``. Takes about a minute.
"""

import numpy as np

from qperceptron import ModelParams
from qperceptron.montecarlo import McConfig, capacity_crossing

for kt, alphas in ((0.0, np.arange(1.2, 2.81, 0.2)), (1.0, np.arange(0.2, 1.01, 0.1))):
    cfg = McConfig(60, tuple(np.round(alphas, 10)), 100, ModelParams(0.0, 0.0, kappa=kt),
                   base_seed=1)
    res = capacity_crossing(cfg)
    print(f"kappa_tilde={kt}: theory {res.alpha_theory:.4f}, crossing "
          f"{res.crossing_estimate:.4f} (95% band {res.crossing_band[0]:.4f}"
          f"..{res.crossing_band[1]:.4f})")
    for row in res.rows:
        print(f"  alpha={row.alpha:4.2f} p={row.p:3d}  "
              f"P(feasible)={row.feasible / row.trials:.2f}")
