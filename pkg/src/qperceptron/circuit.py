"""Gaussian-state simulation of the continuous-variable perceptron circuit.

States are stored as a mean vector and covariance matrix in the ordering
``(q_1, p_1, ..., q_n, p_n)`` with ``[q, p] = i``, so the vacuum-like
minimum-uncertainty product is ``Var(q) Var(p) = 1/4`` and every pure state
has symplectic eigenvalues 1/2. Gates act as ``mean -> S mean`` and
``cov -> S cov S^T`` for a symplectic matrix ``S``.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def omega(n):
    """Symplectic form for ``n`` modes in ``(q1, p1, ..., qn, pn)`` order."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size % 2 or cov.shape != (mean.size, mean.size):
            raise DomainError(f"bad shapes: mean {mean.shape}, cov {cov.shape}")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0.0):
            raise DomainError("covariance matrix must be symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def modes(self):
        return self.mean.size // 2

    def transform(self, S):
        """Push the state through the linear symplectic map ``S``."""
        cov = S @ self.cov @ S.T
        return GaussianState(S @ self.mean, 0.5 * (cov + cov.T))

    def symplectic_eigenvalues(self):
        """Moduli of the eigenvalues of ``i Omega cov``, one per mode, ascending."""
        W = omega(self.modes)
        try:
            # L^T (i Omega) L is Hermitian and similar to i Omega cov
            L = np.linalg.cholesky(self.cov)
            nu = np.abs(np.linalg.eigvalsh(1j * (L.T @ W @ L)))
        except np.linalg.LinAlgError:
            nu = np.abs(np.linalg.eigvals(1j * W @ self.cov))
        return np.sort(nu)[::2]

    def is_physical(self, atol=1e-10):
        """Positive definite and satisfying ``cov + (i/2) Omega >= 0``."""
        if np.min(np.linalg.eigvalsh(self.cov)) <= 0.0:
            return False
        return bool(np.all(self.symplectic_eigenvalues() >= 0.5 - atol))

    def to_json(self):
        return json.dumps({"modes": self.modes, "mean": self.mean.tolist(),
                           "cov": self.cov.ravel().tolist()})

    @classmethod
    def from_json(cls, text):
        record = json.loads(text)
        n = 2 * record["modes"]
        return cls(np.array(record["mean"]), np.array(record["cov"]).reshape(n, n))


def encode(x, sigma):
    """Product of minimum-uncertainty wavepackets centred at ``x_j`` with width ``sigma``."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    mean = np.zeros(2 * n)
    mean[::2] = x
    cov = np.diag(np.tile([sigma**2, 0.25 / sigma**2], n))
    return GaussianState(mean, cov)


def squeeze_matrix(n, j, w):
    S = np.eye(2 * n)
    S[2 * j, 2 * j] = w
    S[2 * j + 1, 2 * j + 1] = 1.0 / w
    return S


def apply_squeeze(state, j, w):
    """``q_j -> w q_j``, ``p_j -> p_j / w``.

    Negative ``w`` is the ``|w|`` squeeze followed by the point reflection
    ``(q_j, p_j) -> (-q_j, -p_j)``, which is the same diagonal matrix.
    """
    if w == 0.0:
        raise DomainError("squeezing cannot implement a zero weight")
    _check_mode(state, j)
    return state.transform(squeeze_matrix(state.modes, j, w))


def cadd_matrix(n, control, target, gain=1.0):
    S = np.eye(2 * n)
    S[2 * target, 2 * control] = gain
    S[2 * control + 1, 2 * target + 1] = -gain
    return S


def apply_cadd(state, control, target):
    """Controlled addition ``exp(-i q_c p_t)``: ``q_t -> q_t + q_c``, ``p_c -> p_c - p_t``."""
    if control == target:
        raise DomainError("control and target modes must differ")
    _check_mode(state, control)
    _check_mode(state, target)
    return state.transform(cadd_matrix(state.modes, control, target))


def apply_cadd_inverse(state, control, target):
    if control == target:
        raise DomainError("control and target modes must differ")
    return state.transform(cadd_matrix(state.modes, control, target, gain=-1.0))


@dataclass(frozen=True)
class CircuitSpec:
    weights: tuple
    sigma: float

    def __post_init__(self):
        weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        if not weights:
            raise DomainError("at least one weight is required")
        if any(w == 0.0 for w in weights):
            raise DomainError("zero weights cannot be implemented by squeezing")
        if not self.sigma > 0.0:
            raise DomainError(f"sigma must be > 0, got {self.sigma!r}")
        object.__setattr__(self, "weights", weights)


def append_output_mode(state, ancilla_width=None):
    """Add the output register as the last mode.

    With ``ancilla_width=None`` the register is an ideal accumulator: zero
    mean and zero covariance, a formal position eigenstate at ``q = 0``. It
    is not a physical state, but it leaves the output position marginal
    exactly equal to the weighted sum of inputs. A finite ``ancilla_width``
    ``s0`` gives a physical squeezed vacuum with ``Var(q) = s0**2``.
    """
    n = state.modes
    mean = np.concatenate([state.mean, [0.0, 0.0]])
    cov = np.zeros((2 * n + 2, 2 * n + 2))
    cov[:2 * n, :2 * n] = state.cov
    if ancilla_width is not None:
        if not ancilla_width > 0.0:
            raise DomainError(f"ancilla width must be > 0, got {ancilla_width!r}")
        cov[2 * n, 2 * n] = ancilla_width**2
        cov[2 * n + 1, 2 * n + 1] = 0.25 / ancilla_width**2
    return GaussianState(mean, cov)


def run_perceptron_circuit(x, spec, ancilla_width=None):
    """Encode ``x``, then apply ``prod_j CX_{j,out} S_j`` into an appended output mode."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != len(spec.weights):
        raise DomainError(f"pattern has {x.size} components, circuit has {len(spec.weights)} weights")
    state = append_output_mode(encode(x, spec.sigma), ancilla_width)
    out = state.modes - 1
    for j, w in enumerate(spec.weights):
        state = apply_squeeze(state, j, w)
        state = apply_cadd(state, j, out)
    return state


def output_marginal(state):
    """Mean and variance of the position quadrature of the last mode."""
    if state.modes < 1:
        raise DomainError("state has no modes")
    k = 2 * (state.modes - 1)
    return float(state.mean[k]), float(state.cov[k, k])


def _check_mode(state, j):
    if not 0 <= j < state.modes:
        raise DomainError(f"mode {j} out of range for {state.modes} modes")
