"""Special functions behind the fluid-antenna port correlation coefficient.

The correlation between the reference port and any other port of a fluid
antenna with aperture W wavelengths is

    mu(W) = sqrt(2) * sqrt( 1F2(1/2; 1, 3/2; -pi^2 W^2) - J1(2 pi W) / (2 pi W) ),

where J1 is the first-order Bessel function of the first kind and 1F2 is a
generalized hypergeometric function.  Both are entire functions and are
evaluated here by their power series with a term-ratio stopping rule.

For large |argument| the alternating series cancels catastrophically: the
largest intermediate term can exceed the final sum by many orders of
magnitude, and no summation trick recovers digits lost when the individual
terms are rounded.  Each evaluation therefore tracks the largest term it
produced and transparently re-runs the same series in arbitrary precision
(mpmath) whenever the double-precision roundoff bound would breach the
accuracy target.  Plain double precision is used for W up to roughly 2.5,
which covers every antenna size of practical interest.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath

MAX_TERMS = 500

# accuracy targets the evaluators guarantee on their stated domains
_J_ABS_TOL = 1e-12
_HYP_REL_TOL = 1e-10

# escalate to arbitrary precision once eps * largest_term threatens the target
_EPS = 2.22e-16


class ConvergenceError(ArithmeticError):
    """Series failed to converge within the term budget."""

    def __init__(self, message, partial_sum, terms):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms


def _check_finite(name, x):
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")


def _kahan_add(total, comp, term):
    y = term - comp
    t = total + y
    return t, (t - total) - y


def _bessel_jn_double(n, x):
    """J_n power series in doubles; returns (sum, largest |term|, terms used)."""
    half = x / 2.0
    term = half**n / math.factorial(n)
    total, comp = 0.0, 0.0
    tmax = abs(term)
    q = -half * half
    for k in range(MAX_TERMS):
        total, comp = _kahan_add(total, comp, term)
        term = term * q / ((k + 1.0) * (k + 1.0 + n))
        tmax = max(tmax, abs(term))
        if abs(term) < 1e-16 * abs(total):
            return total, tmax, k + 1
    raise ConvergenceError(
        f"J{n} series did not converge within {MAX_TERMS} terms at x={x}",
        total,
        MAX_TERMS,
    )


def _bessel_jn_escalated(n, x, digits):
    with mpmath.workdps(digits):
        half = mpmath.mpf(x) / 2
        term = half**n / mpmath.factorial(n)
        total = mpmath.mpf(0)
        q = -half * half
        stop = mpmath.mpf(10) ** (-(digits - 2))
        for k in range(MAX_TERMS):
            total += term
            term = term * q / ((k + 1) * (k + 1 + n))
            if abs(term) < stop * abs(total):
                return float(total)
        raise ConvergenceError(
            f"J{n} escalated series did not converge at x={x}", float(total), MAX_TERMS
        )


def _bessel_jn(n, x):
    _check_finite("x", x)
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    total, tmax, _ = _bessel_jn_double(n, x)
    # 10*eps*tmax over-estimates the per-term rounding; cheap and safe
    if 10.0 * _EPS * tmax > 0.1 * _J_ABS_TOL:
        digits = 25 + max(0, int(math.log10(tmax)) + 1)
        return _bessel_jn_escalated(n, x, digits)
    return total


def bessel_j1(x: float) -> float:
    """First-order Bessel function J1(x) for x >= 0, absolute error <= 1e-12."""
    return _bessel_jn(1, x)


def bessel_j0(x: float) -> float:
    """J0(x), provided for the recurrence consistency check J0 + J2 = 2 J1/x."""
    return _bessel_jn(0, x)


def bessel_j2(x: float) -> float:
    """J2(x), companion of :func:`bessel_j0`."""
    return _bessel_jn(2, x)


def _hyp1f2_double(a, b, c, z):
    total, comp = 0.0, 0.0
    term = 1.0
    tmax = 1.0
    for k in range(MAX_TERMS):
        total, comp = _kahan_add(total, comp, term)
        term = term * z * (a + k) / ((b + k) * (c + k) * (k + 1.0))
        tmax = max(tmax, abs(term))
        if abs(term) < 1e-16 * abs(total):
            return total, tmax, k + 1
    raise ConvergenceError(
        f"1F2 series did not converge within {MAX_TERMS} terms at z={z}",
        total,
        MAX_TERMS,
    )


def _hyp1f2_escalated(a, b, c, z, digits):
    with mpmath.workdps(digits):
        total = mpmath.mpf(0)
        term = mpmath.mpf(1)
        az, bz, cz, zz = (mpmath.mpf(v) for v in (a, b, c, z))
        stop = mpmath.mpf(10) ** (-(digits - 2))
        for k in range(MAX_TERMS):
            total += term
            term = term * zz * (az + k) / ((bz + k) * (cz + k) * (k + 1))
            if abs(term) < stop * abs(total):
                return float(total)
        raise ConvergenceError(
            f"1F2 escalated series did not converge at z={z}", float(total), MAX_TERMS
        )


def hyp1f2(a: float, b: float, c: float, z: float) -> float:
    """Generalized hypergeometric 1F2(a; b, c; z), relative error <= 1e-10.

    b and c must not be non-positive integers (the series denominators would
    vanish).  The series terminates by term ratio; badly cancelling arguments
    are detected and re-summed in arbitrary precision.
    """
    for name, v in (("a", a), ("b", b), ("c", c), ("z", z)):
        _check_finite(name, v)
    for name, v in (("b", b), ("c", c)):
        if v <= 0 and float(v).is_integer():
            raise ValueError(f"{name} must not be a non-positive integer, got {v}")
    if z == 0.0:
        return 1.0
    total, tmax, _ = _hyp1f2_double(a, b, c, z)
    floor = max(abs(total), 1e-300)
    if 10.0 * _EPS * tmax > 0.1 * _HYP_REL_TOL * floor:
        digits = 25 + max(0, int(math.log10(tmax / floor)) + 1)
        return _hyp1f2_escalated(a, b, c, z, digits)
    return total


@lru_cache(maxsize=None)
def port_correlation(W: float) -> float:
    """Correlation coefficient mu between fluid-antenna ports, aperture W wavelengths.

    mu(W) = sqrt(2) * sqrt(1F2(1/2; 1, 3/2; -pi^2 W^2) - J1(2 pi W)/(2 pi W)).

    Requires W > 0.  The W -> 0+ limit is 1 (fully correlated ports); tiny
    positive W returns a value correspondingly close to 1.  The radicand is
    clamped to [0, 1/2] so mu stays a valid correlation magnitude even when
    cancellation noise lands marginally outside.
    """
    _check_finite("W", W)
    if W <= 0:
        raise ValueError(f"antenna size W must be > 0, got {W}")
    x = 2.0 * math.pi * W
    radicand = hyp1f2(0.5, 1.0, 1.5, -math.pi**2 * W * W) - bessel_j1(x) / x
    mu_sq = 2.0 * radicand
    return math.sqrt(min(max(mu_sq, 0.0), 1.0))
