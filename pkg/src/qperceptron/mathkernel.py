"""Gaussian special functions and truncated Gaussian moments.

The moments ``I_k(a) = int_a^inf Dx (x - a)**k`` (``Dx`` the standard normal
measure) for k = 0, 1, 2 are the building blocks of the capacity equations.
For large positive ``a`` they are evaluated through the scaled tails
``J_k(a) = I_k(a) / phi(a)``, which stay O(1/a**(k+1)) and never underflow.
"""

import math

from scipy import special

from .errors import DomainError

SQRT2 = math.sqrt(2.0)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Above this point the closed forms lose digits to cancellation; the
# continued fraction is used instead.
_TAIL_SWITCH = 2.0
_CF_DEPTH = 400


def std_normal_pdf(x):
    return math.exp(-0.5 * x * x - LOG_SQRT_2PI)


def std_normal_cdf(x):
    """Standard normal distribution function ``(1 + erf(x / sqrt 2)) / 2``."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")
    return float(special.ndtr(x))


def std_normal_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation for large x."""
    return float(special.ndtr(-float(x)))


def log_std_normal_sf(x):
    return float(special.log_ndtr(-float(x)))


def std_normal_cdf_inv(p):
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1).

    Starts from the rational approximation in ``scipy.special.ndtri`` and
    applies Newton steps in the log domain, which keeps full relative
    accuracy for p down to the smallest normal doubles.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    x = float(special.ndtri(p))
    if p < 0.5:
        target = math.log(p)
        for _ in range(3):
            logc = float(special.log_ndtr(x))
            # d/dx log Phi(x) = phi(x) / Phi(x)
            slope = math.exp(-0.5 * x * x - LOG_SQRT_2PI - logc)
            step = (logc - target) / slope
            x -= step
            if abs(step) <= 1e-15 * max(1.0, abs(x)):
                break
    else:
        q = 1.0 - p
        for _ in range(3):
            step = (float(special.ndtr(-x)) - q) / -std_normal_pdf(x)
            if not math.isfinite(step):
                break
            x -= step
            if abs(step) <= 1e-15 * max(1.0, abs(x)):
                break
    return x


def _mills_fractions(a):
    """Return ``(R, C1, C2)`` with ``R = 1/(a + C1)`` and ``C1 = 1/(a + C2)``.

    ``R`` is the Mills ratio ``(1 - Phi(a)) / phi(a)`` and ``C_j`` are the
    tails of its Laplace continued fraction ``C_j = j / (a + C_{j+1})``.
    """
    c = 0.0
    for j in range(_CF_DEPTH, 2, -1):
        c = j / (a + c)
    c2 = 2.0 / (a + c)
    c1 = 1.0 / (a + c2)
    return 1.0 / (a + c1), c1, c2


def scaled_truncated_moment(k, a):
    """``I_k(a) / phi(a)``; finite for every finite ``a``.

    For ``a > 2`` this uses ``J_0 = R``, ``J_1 = R*C1``, ``J_2 = R*C1*C2``
    from :func:`_mills_fractions`; no subtraction of nearly equal terms occurs.
    """
    _check_order(k)
    a = float(a)
    if a > _TAIL_SWITCH:
        r, c1, c2 = _mills_fractions(a)
        return (r, r * c1, r * c1 * c2)[k]
    return truncated_moment(k, a) / std_normal_pdf(a)


def truncated_moment(k, a):
    """Truncated Gaussian moment ``I_k(a) = int_a^inf Dx (x - a)**k``.

    Parameters
    ----------
    k : int
        Order, one of 0, 1, 2.
    a : float
        Lower integration limit.

    Returns
    -------
    float
        ``1 - Phi(a)`` for k = 0, ``phi(a) - a (1 - Phi(a))`` for k = 1 and
        ``(1 + a**2)(1 - Phi(a)) - a phi(a)`` for k = 2. Underflows to 0.0
        only when the true value is below the smallest double; use
        :func:`log_truncated_moment` there.
    """
    _check_order(k)
    a = float(a)
    if not math.isfinite(a):
        raise DomainError(f"a must be finite, got {a!r}")
    if a > _TAIL_SWITCH:
        return std_normal_pdf(a) * scaled_truncated_moment(k, a)
    q = std_normal_sf(a)
    if k == 0:
        return q
    phi = std_normal_pdf(a)
    if k == 1:
        return phi - a * q
    return (1.0 + a * a) * q - a * phi


def log_truncated_moment(k, a):
    """Natural log of :func:`truncated_moment`, valid far into the upper tail."""
    _check_order(k)
    a = float(a)
    if a > _TAIL_SWITCH:
        return -0.5 * a * a - LOG_SQRT_2PI + math.log(scaled_truncated_moment(k, a))
    return math.log(truncated_moment(k, a))


def erfc_tail_asymptotic(x):
    """Two-term asymptotic expansion of ``1 - erf(x)`` for large ``|x|``.

    ``erf(x) ~ +-1 - exp(-x**2)/sqrt(pi) * (1/x - 1/(2 x**3))`` as
    ``x -> +-inf``, so the result is close to 0 for large positive x and
    close to 2 for large negative x. The truncation error is relative order
    ``3/(4 x**4)``.
    """
    x = float(x)
    if abs(x) < 4.0:
        raise DomainError(f"expansion requires |x| >= 4, got {x!r}")
    tail = math.exp(-x * x) / math.sqrt(math.pi) * (1.0 / x - 1.0 / (2.0 * x**3))
    return tail if x > 0 else 2.0 + tail


def _check_order(k):
    if k not in (0, 1, 2):
        raise DomainError(f"moment order must be 0, 1 or 2, got {k!r}")
