"""Saddle-point equations for the storage capacity of the CV perceptron.

With ``s = sqrt(1 - m_in**2)`` the integration limits are
``a_-(M) = (m_in M - kt) / s`` and ``a_+(M) = -(kt + m_in M) / s``. They
depend on ``M`` only through the shift ``b = m_in M / s``, so the solver
works in ``b``:

    F(b) = (1 + m_out) I_1(b - kt/s) - (1 - m_out) I_1(-b - kt/s)

is strictly decreasing in ``b`` (``dI_1/da = -I_0 < 0``), which makes the
root unique and plain bisection safe. The capacity follows from

    1 / alpha_c = (1 + m_out)/2 I_2(a_-) + (1 - m_out)/2 I_2(a_+).
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field

from . import mathkernel as mk
from .errors import ConvergenceError, DomainError, InfeasibleBias, OverflowGuard

log = logging.getLogger(__name__)

SHIFT_LIMIT = 1e6
BISECTION_TOL = 1e-13


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of one capacity problem.

    ``epsilon`` is ignored when ``sigma == 0``; its default matches the CLI.
    """

    m_in: float
    m_out: float
    kappa: float = 0.0
    sigma: float = 0.0
    epsilon: float = 0.01

    def __post_init__(self):
        for name in ("m_in", "m_out", "kappa", "sigma", "epsilon"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if not abs(self.m_in) < 1.0:
            raise DomainError(f"|m_in| must be < 1, got {self.m_in!r}")
        if not abs(self.m_out) <= 1.0:
            raise DomainError(f"|m_out| must be <= 1, got {self.m_out!r}")
        if self.kappa < 0.0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa!r}")
        if self.sigma < 0.0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SaddleSolution:
    M: float
    alpha_c: float
    residual: float
    iterations: int
    kappa_tilde: float
    shift: float
    a_minus: float
    a_plus: float
    warnings: tuple = field(default=())


def effective_threshold(params):
    """``kappa + sigma * Phi^{-1}(1 - epsilon)``; exactly ``kappa`` when sigma is 0."""
    if not 0.0 < params.epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {params.epsilon!r}")
    if params.sigma == 0.0:
        return params.kappa
    return params.kappa + params.sigma * mk.std_normal_cdf_inv(1.0 - params.epsilon)


def boundary_offsets(M, kappa_tilde, m_in):
    """Return ``(a_minus, a_plus)`` for order parameter ``M``."""
    if not abs(m_in) < 1.0:
        raise DomainError(f"|m_in| must be < 1, got {m_in!r}")
    s = math.sqrt(1.0 - m_in * m_in)
    return (m_in * M - kappa_tilde) / s, -(kappa_tilde + m_in * M) / s


def _sides(b, c, m_out):
    """Log of both sides of the order-parameter equation at shift ``b``."""
    left = math.log1p(m_out) + mk.log_truncated_moment(1, b - c)
    right = math.log1p(-m_out) + mk.log_truncated_moment(1, -b - c)
    return left, right


def order_parameter_residual(b, c, m_out):
    """``(1 + m_out) I_1(b - c) - (1 - m_out) I_1(-b - c)`` in linear scale."""
    return ((1.0 + m_out) * mk.truncated_moment(1, b - c)
            - (1.0 - m_out) * mk.truncated_moment(1, -b - c))


def _decreasing_sign(b, c, m_out):
    left, right = _sides(b, c, m_out)
    return left - right


def solve_shift(m_in, m_out, kappa_tilde):
    """Root ``b*`` of the order-parameter equation in the shift variable.

    Valid at ``m_in = 0`` too, where it describes the limit ``m_in -> 0+``
    (the order parameter ``M = b s / m_in`` then diverges unless b* = 0).

    Returns
    -------
    (b, iterations) : (float, int)
    """
    if not abs(m_in) < 1.0:
        raise DomainError(f"|m_in| must be < 1, got {m_in!r}")
    if not abs(m_out) < 1.0:
        raise OverflowGuard(f"no finite order parameter for m_out = {m_out!r}",
                            asymptote=math.inf)
    if m_out == 0.0:
        return 0.0, 0
    c = kappa_tilde / math.sqrt(1.0 - m_in * m_in)

    # F is decreasing; m_out > 0 puts the root at b > 0 and vice versa.
    lo, hi = -1.0, 1.0
    g_lo, g_hi = _decreasing_sign(lo, c, m_out), _decreasing_sign(hi, c, m_out)
    iterations = 0
    while g_lo < 0.0 or g_hi > 0.0:
        if max(abs(lo), abs(hi)) >= SHIFT_LIMIT:
            raise ConvergenceError(
                f"no sign change for |b| <= {SHIFT_LIMIT:g} "
                f"(m_in={m_in}, m_out={m_out}, kappa_tilde={kappa_tilde})")
        if g_lo < 0.0:
            hi, g_hi = lo, g_lo
            lo *= 2.0
            g_lo = _decreasing_sign(lo, c, m_out)
        else:
            lo, g_lo = hi, g_hi
            hi *= 2.0
            g_hi = _decreasing_sign(hi, c, m_out)
        iterations += 1
    if g_lo < g_hi:
        log.warning("non-monotone residual on [%g, %g]; root may not be unique", lo, hi)

    while hi - lo > BISECTION_TOL * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        g_mid = _decreasing_sign(mid, c, m_out)
        iterations += 1
        if g_mid == 0.0:
            return mid, iterations
        if g_mid > 0.0:
            lo = mid
        else:
            hi = mid
    # pick the endpoint with the smaller log-imbalance
    if abs(_decreasing_sign(lo, c, m_out)) <= abs(_decreasing_sign(hi, c, m_out)):
        return lo, iterations
    return hi, iterations


def _inverse_capacity(a_minus, a_plus, m_out):
    terms = []
    if m_out > -1.0:
        terms.append(math.log1p(m_out) - math.log(2.0) + mk.log_truncated_moment(2, a_minus))
    if m_out < 1.0:
        terms.append(math.log1p(-m_out) - math.log(2.0) + mk.log_truncated_moment(2, a_plus))
    top = max(terms)
    return top + math.log(sum(math.exp(t - top) for t in terms))


def capacity_for(m_in, m_out, kappa_tilde, unbiased_limit=False):
    """Solve both saddle-point equations at a given effective threshold.

    Parameters
    ----------
    m_in, m_out : float
        Pattern and target biases.
    kappa_tilde : float
        Effective stability threshold.
    unbiased_limit : bool
        At ``m_in = 0`` and ``m_out != 0`` the equations have no solution;
        with this flag the ``m_in -> 0+`` limit is returned instead (``M``
        is then infinite). Without it :class:`InfeasibleBias` is raised.

    Returns
    -------
    SaddleSolution
    """
    if not abs(m_in) < 1.0:
        raise DomainError(f"|m_in| must be < 1, got {m_in!r}")
    if not abs(m_out) <= 1.0:
        raise DomainError(f"|m_out| must be <= 1, got {m_out!r}")
    if m_in == 0.0 and m_out != 0.0 and not unbiased_limit:
        raise InfeasibleBias(
            "unbiased patterns (m_in = 0) cannot match biased targets "
            f"(m_out = {m_out!r})")
    b, iterations = solve_shift(m_in, m_out, kappa_tilde)
    s = math.sqrt(1.0 - m_in * m_in)
    c = kappa_tilde / s
    a_minus, a_plus = b - c, -b - c
    if m_in != 0.0:
        M = b * s / m_in
    else:
        M = 0.0 if b == 0.0 else math.copysign(math.inf, b)
    log_inv = _inverse_capacity(a_minus, a_plus, m_out)
    alpha = math.exp(-log_inv)
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise OverflowGuard(f"capacity not representable for m_out = {m_out!r}",
                            asymptote=alpha)
    return SaddleSolution(
        M=M,
        alpha_c=alpha,
        residual=order_parameter_residual(b, c, m_out),
        iterations=iterations,
        kappa_tilde=kappa_tilde,
        shift=b,
        a_minus=a_minus,
        a_plus=a_plus,
    )


def storage_capacity(params):
    """Quantum storage capacity for ``params`` (a :class:`ModelParams`)."""
    kt = effective_threshold(params)
    sol = capacity_for(params.m_in, params.m_out, kt)
    if params.sigma > 0.0 and params.epsilon > 0.5:
        sol = dataclasses.replace(
            sol, warnings=sol.warnings + ("epsilon > 1/2 lowers the threshold below kappa",))
    return sol


def classical_capacity(m_in, m_out, kappa):
    """Capacity of the classical perceptron (sigma = 0) at stability ``kappa``."""
    return storage_capacity(ModelParams(m_in=m_in, m_out=m_out, kappa=kappa))


SWEEP_VARIABLES = ("m_in", "m_out", "m", "kappa", "sigma", "epsilon", "kappa_tilde")


@dataclass(frozen=True)
class CurveRow:
    value: float
    params: ModelParams
    kappa_tilde: float
    M: float
    alpha_c: float
    status: str


def params_at(template, sweep_variable, value):
    """Copy of ``template`` with the swept variable set to ``value``."""
    if sweep_variable == "m":
        return template.replace(m_in=value, m_out=value)
    if sweep_variable == "kappa_tilde":
        return template.replace(kappa=value, sigma=0.0)
    if sweep_variable not in SWEEP_VARIABLES:
        raise DomainError(f"unknown sweep variable {sweep_variable!r}")
    return template.replace(**{sweep_variable: value})


def capacity_curve(params_template, sweep_variable, grid):
    """Evaluate the capacity along a one-dimensional sweep.

    Points that cannot be solved produce a row with ``status`` set to
    ``"invalid"``, ``"infeasible-bias"``, ``"overflow"`` or
    ``"no-convergence"`` and NaN values; the sweep never aborts.
    """
    if sweep_variable not in SWEEP_VARIABLES:
        raise DomainError(f"unknown sweep variable {sweep_variable!r}")
    rows = []
    nan = math.nan
    for value in grid:
        try:
            params = params_at(params_template, sweep_variable, float(value))
        except DomainError:
            rows.append(CurveRow(float(value), None, nan, nan, nan, "invalid"))
            continue
        kt = effective_threshold(params)
        try:
            sol = storage_capacity(params)
        except InfeasibleBias:
            rows.append(CurveRow(float(value), params, kt, nan, nan, "infeasible-bias"))
        except OverflowGuard as exc:
            alpha = exc.asymptote if exc.asymptote is not None else nan
            rows.append(CurveRow(float(value), params, kt, nan, alpha, "overflow"))
        except ConvergenceError:
            rows.append(CurveRow(float(value), params, kt, nan, nan, "no-convergence"))
        else:
            rows.append(CurveRow(float(value), params, kt, sol.M, sol.alpha_c, "ok"))
    return rows
