"""Approach of the full solver to its leading-order tails.

Run with ``python3 demos/asymptotes.py``.
"""

from qperceptron import ModelParams
from qperceptron.asymptotics import convergence_diagnostic, joint_bias_asymptote, tail_grid

# Output bias at fixed input bias: alpha_c grows like -1/((1-m) log(1-m)).
# The approach is logarithmically slow.
template = ModelParams(0.0, 0.0, kappa=0.0, sigma=0.1, epsilon=0.01)
print("output-bias tail, m_in -> 0+")
for row in convergence_diagnostic(template, "output_bias", tail_grid(2, 10)):
    print(f"  1-m_out={1 - row.bias:.0e}  full={row.alpha_full:12.5g}  "
          f"asymptote={row.alpha_asymptote:12.5g}  ratio={row.ratio:.4f}")

# Joint bias: the capacity saturates at 1/kappa_tilde^2 instead of diverging.
for kt in (0.5, 1.0, 2.0):
    print(f"\njoint tail, kappa_tilde={kt}, limit {joint_bias_asymptote(kt):.4f}")
    params = ModelParams(0.0, 0.0, kappa=kt)
    for row in convergence_diagnostic(params, "joint_bias", tail_grid(2, 8)):
        print(f"  1-m={1 - row.bias:.0e}  ratio={row.ratio:.6f}  M-kappa_tilde={row.M:+.3e}")
