"""Stochastic classification model and the margin feasibility reduction.

A weight vector ``w`` stores pattern ``x`` with target ``xi`` when the
homodyne outcome ``s ~ N(w.x, |w|^2 sigma^2)`` lands on the correct side
of the dead zone ``(-kappa |w|, kappa |w|)`` with probability at least
``1 - epsilon``. Since that probability is ``Phi(-kappa/sigma + xi w.x /
(|w| sigma))``, the condition is equivalent to the classical margin
condition ``xi w.x / |w| >= kappa + sigma Phi^{-1}(1 - epsilon)``.
"""

import enum
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import ConvergenceError, DomainError
from .rng import stream

PATTERN_STREAM = 0
TARGET_STREAM = 1
ASCENT_ITERS = 500


@dataclass(frozen=True, eq=False)
class Instance:
    """``p`` binary patterns of dimension ``N`` with binary targets.

    Rows of ``patterns`` are generated from one stream and ``targets`` from
    another, so the first ``q`` rows of an instance equal the instance drawn
    with ``p = q`` and the same seed.
    """

    patterns: np.ndarray
    targets: np.ndarray
    m_in: float
    m_out: float
    seed: int

    def __post_init__(self):
        patterns = np.asarray(self.patterns, dtype=np.int8)
        targets = np.asarray(self.targets, dtype=np.int8)
        if patterns.ndim != 2 or targets.ndim != 1 or patterns.shape[0] != targets.shape[0]:
            raise DomainError(
                f"inconsistent shapes {patterns.shape} and {targets.shape}")
        if not (np.all(np.abs(patterns) == 1) and np.all(np.abs(targets) == 1)):
            raise DomainError("pattern and target entries must be +1 or -1")
        patterns.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "targets", targets)

    @property
    def p(self):
        return self.patterns.shape[0]

    @property
    def N(self):
        return self.patterns.shape[1]

    def head(self, p):
        """Instance made of the first ``p`` patterns."""
        return Instance(self.patterns[:p], self.targets[:p], self.m_in, self.m_out, self.seed)

    def signed_patterns(self):
        """``xi^mu x^mu`` as a float ``(p, N)`` array."""
        return self.targets[:, None].astype(float) * self.patterns

    def to_json(self, explicit=True):
        record = {"N": self.N, "p": self.p, "m_in": self.m_in, "m_out": self.m_out,
                  "seed": self.seed}
        if explicit:
            record["patterns"] = self.patterns.tolist()
            record["targets"] = self.targets.tolist()
        return json.dumps(record)

    @classmethod
    def from_json(cls, text):
        """Inverse of :meth:`to_json`; regenerates matrices from the seed if absent."""
        record = json.loads(text)
        if "patterns" in record:
            inst = cls(np.array(record["patterns"]), np.array(record["targets"]),
                       record["m_in"], record["m_out"], record["seed"])
            if inst.N != record["N"] or inst.p != record["p"]:
                raise DomainError("declared dimensions do not match the matrices")
            return inst
        return sample_instance(record["N"], record["p"], record["m_in"], record["m_out"],
                               record["seed"])


def _biased_signs(rng, shape, bias):
    return np.where(rng.random(shape) < 0.5 * (1.0 + bias), 1, -1).astype(np.int8)


def sample_instance(N, p, m_in, m_out, seed):
    """Draw ``p`` patterns in ``{-1, +1}^N`` with ``P(+1) = (1 + m_in)/2`` and
    targets with ``P(+1) = (1 + m_out)/2``; deterministic in ``seed``."""
    if N < 1 or p < 1:
        raise DomainError(f"N and p must be >= 1, got N={N}, p={p}")
    for name, bias in (("m_in", m_in), ("m_out", m_out)):
        if not -1.0 <= bias <= 1.0:
            raise DomainError(f"{name} must lie in [-1, 1], got {bias!r}")
    patterns = _biased_signs(stream(seed, PATTERN_STREAM), (p, N), m_in)
    targets = _biased_signs(stream(seed, TARGET_STREAM), (p,), m_out)
    return Instance(patterns, targets, float(m_in), float(m_out), int(seed))


def _norm(w):
    w = np.asarray(w, dtype=float)
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        raise DomainError("weight vector must be nonzero")
    return w, norm


def classification_probability(w, x, xi, kappa, sigma):
    """Probability ``R`` that the homodyne outcome classifies ``x`` as ``xi``."""
    if not sigma > 0.0:
        raise DomainError("sigma must be > 0; use margin() for the classical limit")
    w, norm = _norm(w)
    z = -kappa / sigma + xi * float(np.dot(w, x)) / (norm * sigma)
    return float(special.ndtr(z))


def sample_homodyne(w, x, sigma, seed, size=None):
    """Homodyne outcome(s) ``s ~ N(w.x, |w|^2 sigma^2)``."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    w, norm = _norm(w)
    return stream(seed).normal(float(np.dot(w, x)), norm * sigma, size=size)


class Outcome(enum.Enum):
    PLUS = 1
    MINUS = -1
    UNCLASSIFIED = 0


def classify_outcome(s, w_norm, kappa):
    """Three-way decision; the thresholds ``+-kappa |w|`` count as classified."""
    if s >= kappa * w_norm:
        return Outcome.PLUS
    if s <= -kappa * w_norm:
        return Outcome.MINUS
    return Outcome.UNCLASSIFIED


def classify_outcomes(s, w_norm, kappa):
    """Vectorised :func:`classify_outcome` returning +1, -1 or 0 per entry."""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape, dtype=np.int8)
    out[s <= -kappa * w_norm] = -1
    out[s >= kappa * w_norm] = 1
    return out


def margin(w, instance):
    """Smallest normalised stability ``min_mu xi^mu w.x^mu / |w|``."""
    w, norm = _norm(w)
    return float(np.min(instance.signed_patterns() @ w)) / norm


def quantum_storage_ok(w, instance, kappa, sigma, epsilon):
    """True iff every pattern is classified correctly with probability >= 1 - epsilon.

    With ``sigma = 0`` this is the classical test ``margin >= kappa``.
    """
    if sigma == 0.0:
        return margin(w, instance) >= kappa
    w, norm = _norm(w)
    stabilities = instance.signed_patterns() @ w / norm
    # 1 - R = Phi(kappa/sigma - stability/sigma); compare tails to keep precision
    failure = special.ndtr(kappa / sigma - stabilities / sigma)
    return bool(np.all(failure <= epsilon))


@dataclass(frozen=True)
class MaxMarginResult:
    """Outcome of :func:`max_margin`.

    ``kappa_hat`` is the margin of ``w`` (a lower bound on the optimum);
    ``upper_bound`` is a certified upper bound. ``status`` is ``"separable"``
    (positive optimum), ``"weak"`` (optimum 0), or ``"negative"`` (no
    nonzero ``w`` with all stabilities >= 0).
    """

    w: np.ndarray
    kappa_hat: float
    upper_bound: float
    iterations: int
    status: str

    @property
    def gap(self):
        return self.upper_bound - self.kappa_hat


def _min_norm_point(Y, tol, max_iters):
    """Wolfe's algorithm for the point of ``conv(rows of Y)`` closest to 0.

    Stops once ``|z|^2 - min_i y_i.z <= tol |z|``, which bounds the margin gap
    by ``tol``, or when ``|z|`` is negligible (0 in the hull).
    """
    scale = float(np.max(np.einsum("ij,ij->i", Y, Y)))
    start = int(np.argmin(np.einsum("ij,ij->i", Y, Y)))
    corral = [start]
    lam = np.array([1.0])
    z = Y[start].copy()
    zero_tol = 1e-12 * math.sqrt(scale)
    iterations = 0
    while iterations < max_iters:
        iterations += 1
        proj = Y @ z
        j = int(np.argmin(proj))
        zz = float(z @ z)
        znorm = math.sqrt(zz)
        if znorm <= zero_tol or zz - proj[j] <= max(tol * znorm, 1e-15 * scale):
            return z, iterations
        if j in corral:
            return z, iterations
        corral.append(j)
        lam = np.append(lam, 0.0)
        while True:
            S = Y[corral]
            G = S @ S.T
            k = len(corral)
            A = np.ones((k + 1, k + 1))
            A[:k, :k] = G
            A[k, k] = 0.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                alpha = np.linalg.solve(A, rhs)[:k]
            except np.linalg.LinAlgError:
                alpha = np.linalg.lstsq(A, rhs, rcond=None)[0][:k]
            if np.all(alpha > 1e-14):
                lam = alpha
                break
            mask = alpha <= 1e-14
            theta = float(np.min(lam[mask] / (lam[mask] - alpha[mask])))
            lam = (1.0 - theta) * lam + theta * alpha
            keep = lam > 1e-14
            # drop at least the entry that hit zero
            if np.all(keep):
                keep[int(np.argmin(lam))] = False
            corral = [c for c, kp in zip(corral, keep) if kp]
            lam = lam[keep]
            lam /= lam.sum()
        z = lam @ Y[corral]
    raise ConvergenceError(f"min-norm point not converged in {max_iters} iterations")


def _weakly_separating_direction(Y):
    """Nonzero ``u`` with ``Y u >= 0`` if one exists, else None."""
    N = Y.shape[1]
    if np.linalg.matrix_rank(Y) < N:
        _, _, vt = np.linalg.svd(Y)
        return vt[-1]
    res = optimize.linprog(-Y.sum(axis=0), A_ub=-Y, b_ub=np.zeros(Y.shape[0]),
                           bounds=[(-1.0, 1.0)] * N, method="highs")
    if res.status != 0:
        raise ConvergenceError(f"linear program failed: {res.message}")
    if -res.fun > 1e-9:
        return res.x
    return None


def _sphere_ascent(Y, u0, iters):
    """Projected subgradient ascent of ``min_i y_i.u`` on the unit sphere."""
    u = u0 / np.linalg.norm(u0)
    best_u, best = u, float(np.min(Y @ u))
    step0 = 1.0 / math.sqrt(Y.shape[1])
    for t in range(1, iters + 1):
        j = int(np.argmin(Y @ u))
        u = u + step0 / math.sqrt(t) * Y[j] / np.linalg.norm(Y[j])
        u /= np.linalg.norm(u)
        value = float(np.min(Y @ u))
        if value > best:
            best_u, best = u, value
    return best_u, best


def max_margin(instance, tolerance=1e-7, max_iters=100000, restarts=2, seed=0):
    """Maximise the normalised margin over weights on the sphere ``|w| = sqrt(N)``.

    The optimum equals the distance from the origin to the convex hull of
    ``{xi^mu x^mu}`` when that hull excludes the origin; it is found with
    Wolfe's min-norm-point algorithm, whose iterate ``z`` gives both the
    candidate ``w = z / |z|`` and the upper bound ``|z|``. When the hull
    contains the origin a linear program decides whether margin 0 is
    attainable, and a restarted sphere ascent reports the best negative
    margin found otherwise.

    Parameters
    ----------
    instance : Instance
    tolerance : float
        Target gap between ``kappa_hat`` and the certified upper bound.
    max_iters : int
        Iteration cap for the min-norm-point loop and each ascent restart.
    restarts : int
        Random restarts of the ascent in the negative-margin case.
    seed : int
        Seed for the restart directions.

    Returns
    -------
    MaxMarginResult
    """
    Y = instance.signed_patterns()
    N = instance.N
    radius = math.sqrt(N)
    z, iterations = _min_norm_point(Y, tolerance, max_iters)
    znorm = float(np.linalg.norm(z))
    if znorm > tolerance:
        w = z / znorm
        kappa_hat = float(np.min(Y @ w))
        if znorm - kappa_hat > tolerance:
            raise ConvergenceError(f"margin gap {znorm - kappa_hat:.3g} exceeds tolerance")
        return MaxMarginResult(radius * w, kappa_hat, znorm, iterations, "separable")

    u = _weakly_separating_direction(Y)
    if u is not None:
        u = u / np.linalg.norm(u)
        return MaxMarginResult(radius * u, float(np.min(Y @ u)), znorm, iterations, "weak")

    rng = stream(seed)
    best_u, best = None, -math.inf
    for _ in range(max(1, restarts)):
        u0 = rng.standard_normal(N)
        cand, value = _sphere_ascent(Y, u0, min(max_iters, ASCENT_ITERS))
        if value > best:
            best_u, best = cand, value
    return MaxMarginResult(radius * best_u, best, 0.0, iterations, "negative")


def is_storable(result, kappa_tilde, tolerance):
    """Feasibility decision ``kappa_hat >= kappa_tilde - tolerance``."""
    if result.status == "negative" and kappa_tilde >= 0.0:
        return False
    return result.kappa_hat >= kappa_tilde - tolerance
