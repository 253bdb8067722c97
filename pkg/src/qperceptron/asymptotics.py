"""Large-bias limits of the capacity and comparison with the full solver."""

import math
from dataclasses import dataclass

from scipy import optimize

from . import mathkernel as mk
from .capacity import capacity_for, effective_threshold
from .errors import ConvergenceError, Divergent, DomainError, OverflowGuard

_LOG_4_OVER_SQRT_PI = math.log(4.0 / math.sqrt(math.pi))


def output_bias_asymptote(m_out):
    """Leading behaviour ``-1 / ((1 - m_out) log(1 - m_out))`` as ``m_out -> 1``."""
    if not 0.0 < m_out < 1.0:
        raise DomainError(f"m_out must lie in (0, 1), got {m_out!r}")
    return -1.0 / ((1.0 - m_out) * math.log1p(-m_out))


def joint_bias_asymptote(kappa_tilde):
    """Finite limit ``1 / kappa_tilde**2`` for ``m_in = m_out = m -> 1``."""
    if kappa_tilde < 0.0:
        raise DomainError(f"kappa_tilde must be >= 0, got {kappa_tilde!r}")
    if kappa_tilde == 0.0:
        raise Divergent("capacity diverges as m -> 1 when kappa_tilde = 0")
    return 1.0 / kappa_tilde**2


def joint_log_residual(M, m, kappa_tilde):
    """Log of the left side of the joint-limit equation for ``M(m)``.

    The equation reads
    ``4/sqrt(pi) (1-m)**0.5 exp(-(kt-M)**2 / (4(1-m))) / ((kt-M)**2 (kt+M)) = 1``
    and this returns the log of its left side, so roots are zeros.
    """
    gap = kappa_tilde - M
    return (_LOG_4_OVER_SQRT_PI + 0.5 * math.log1p(-m)
            - gap * gap / (4.0 * (1.0 - m))
            - 2.0 * math.log(abs(gap)) - math.log(kappa_tilde + M))


def joint_order_parameter(m, kappa_tilde, delta=1e-12):
    """Solve the joint-limit equation for ``M`` on the branch just below ``kappa_tilde``.

    The log residual diverges to ``+inf`` at both ends of ``(-kt, kt)``; when
    its interior minimum is negative there are two roots, and the one
    adjacent to ``kt`` is returned.
    """
    if not 0.0 < m < 1.0:
        raise DomainError(f"m must lie in (0, 1), got {m!r}")
    if not kappa_tilde > 0.0:
        raise DomainError(f"kappa_tilde must be > 0, got {kappa_tilde!r}")
    lo_edge = -kappa_tilde + delta * kappa_tilde
    hi_edge = kappa_tilde - delta * kappa_tilde

    def g(M):
        return joint_log_residual(M, m, kappa_tilde)

    res = optimize.minimize_scalar(g, bounds=(lo_edge, hi_edge), method="bounded",
                                   options={"xatol": 1e-14 * kappa_tilde})
    lo = float(res.x)
    if g(lo) >= 0.0:
        raise ConvergenceError(
            f"no root below kappa_tilde for m = {m!r} (minimum log residual {g(lo):.3g})")
    hi = hi_edge
    if g(hi) <= 0.0:
        raise ConvergenceError("residual does not change sign near kappa_tilde")
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def excluded_branch_ratio(m, kappa_tilde):
    """Mismatch of the trial solution ``M = kappa_tilde * m`` in the joint limit.

    Returns ``(I_-/I_+) / ((1-m)/(1+m))`` evaluated exactly at ``M = kt m``;
    a genuine solution would give 1. The ratio grows without bound as
    ``m -> 1``.
    """
    s = math.sqrt((1.0 - m) * (1.0 + m))
    M = kappa_tilde * m
    a_minus = (m * M - kappa_tilde) / s
    a_plus = -(kappa_tilde + m * M) / s
    log_ratio = mk.log_truncated_moment(1, a_minus) - mk.log_truncated_moment(1, a_plus)
    return math.exp(log_ratio - math.log1p(-m) + math.log1p(m))


def tail_grid(k_min, k_max):
    """Bias values ``1 - 10**-k`` for integer k in ``[k_min, k_max]``."""
    return [1.0 - 10.0 ** (-k) for k in range(k_min, k_max + 1)]


@dataclass(frozen=True)
class DiagnosticRow:
    bias: float
    alpha_full: float
    alpha_asymptote: float
    ratio: float
    M: float
    status: str


def convergence_diagnostic(params_template, regime, grid):
    """Compare the full solver with a leading-order asymptote along ``grid``.

    Parameters
    ----------
    params_template : ModelParams
        Supplies ``m_in`` (output-bias regime) and the effective threshold.
    regime : {"output_bias", "joint_bias"}
        ``output_bias`` sweeps ``m_out`` at fixed ``m_in`` against
        :func:`output_bias_asymptote`; ``m_in = 0`` is taken as the limit
        ``m_in -> 0+``. ``joint_bias`` sets ``m_in = m_out = m`` and compares
        with :func:`joint_bias_asymptote`.
    grid : sequence of float
        Bias values.

    Returns
    -------
    list of DiagnosticRow
        ``ratio = alpha_full / alpha_asymptote``. In the joint regime the
        ``M`` column holds the signed gap ``M - kappa_tilde``.
    """
    if regime not in ("output_bias", "joint_bias"):
        raise DomainError(f"unknown regime {regime!r}")
    kt = effective_threshold(params_template)
    nan = math.nan
    rows = []
    for bias in grid:
        bias = float(bias)
        try:
            if regime == "output_bias":
                asym = output_bias_asymptote(bias)
                sol = capacity_for(params_template.m_in, bias, kt, unbiased_limit=True)
                M = sol.M
            else:
                sol = capacity_for(bias, bias, kt)
                M = sol.M - kt
                try:
                    asym = joint_bias_asymptote(kt)
                except Divergent:
                    rows.append(DiagnosticRow(bias, sol.alpha_c, math.inf, nan, M, "divergent"))
                    continue
        except OverflowGuard:
            rows.append(DiagnosticRow(bias, nan, nan, nan, nan, "overflow"))
            continue
        except (DomainError, ConvergenceError):
            rows.append(DiagnosticRow(bias, nan, nan, nan, nan, "invalid"))
            continue
        rows.append(DiagnosticRow(bias, sol.alpha_c, asym, sol.alpha_c / asym, M, "ok"))
    return rows
