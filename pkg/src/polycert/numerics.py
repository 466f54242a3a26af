"""Self-contained special functions and seeded random sampling.

The statistical routines here (regularized incomplete beta, standard
normal CDF and its inverse, one-sided Clopper-Pearson lower confidence
bound) are implemented in-repo so that confidence computations do not
depend on an external special-function library. Random sampling is
built on numpy's counter-based Philox generator; every stochastic
routine in the package takes an explicit seed.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ArgumentError, ConvergenceError

_MAXIT = 300        # continued-fraction iteration cap
_CF_EPS = 3e-16     # relative convergence threshold for continued fractions
_FPMIN = 1e-300     # smallest representable magnitude guard (Lentz)
_SQRT2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta function, evaluated by
    # the modified Lentz method. Converges fast for x < (a+1)/(a+b+2).
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge in {_MAXIT} iterations "
        f"(a={a}, b={b}, x={x})",
        residual=abs(delta - 1.0),
    )


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Parameters
    ----------
    a, b : float
        Positive shape parameters.
    x : float
        Evaluation point in [0, 1].

    Returns
    -------
    float
        I_x(a, b), with absolute error below 1e-10 on the tested domain.
        Evaluated through a continued fraction (iteration cap 300) with
        the usual symmetry switch at x = (a+1)/(a+b+2).
    """
    if not (a > 0.0 and b > 0.0):
        raise ArgumentError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ArgumentError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _erf_series(z: float) -> float:
    # Maclaurin series of erf, adequate to double precision for |z| <= 3.
    z2 = z * z
    term = z
    total = z
    k = 0
    while abs(term) > 1e-18 * max(1.0, abs(total)):
        k += 1
        term *= -z2 / k
        total += term / (2 * k + 1)
        if k > 200:
            break
    return total * 2.0 / _SQRT_PI


def _erfc_cf(z: float) -> float:
    # Continued fraction for erfc(z), z >= 3:
    #   sqrt(pi) exp(z^2) erfc(z) = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    f = _FPMIN
    c = f
    d = 0.0
    for n in range(1, _MAXIT + 1):
        an = 1.0 if n == 1 else (n - 1) / 2.0
        d = z + an * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = z + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return f * math.exp(-z * z) / _SQRT_PI


def norm_cdf(x: float) -> float:
    """Standard normal cumulative distribution function."""
    u = x / _SQRT2
    if abs(u) <= 3.0:
        return 0.5 * (1.0 + _erf_series(u))
    if u > 0.0:
        return 1.0 - 0.5 * _erfc_cf(u)
    return 0.5 * _erfc_cf(-u)


def norm_pdf(x: float) -> float:
    """Standard normal density."""
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


# Rational approximation coefficients for the inverse normal CDF
# (Acklam's algorithm; |relative error| < 1.2e-9 before refinement).
_ICDF_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
           1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ICDF_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
           6.680131188771972e+01, -1.328068155288572e+01)
_ICDF_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
           -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ICDF_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
           3.754408661907416e+00)
_ICDF_PLOW = 0.02425


def inv_norm_cdf(p: float) -> float:
    """Inverse of the standard normal CDF.

    Rational approximation followed by one Newton step against
    :func:`norm_cdf`; absolute error is below 1e-9 for
    p in [1e-12, 1 - 1e-12].
    """
    if not 0.0 < p < 1.0:
        raise ArgumentError(f"p must lie strictly inside (0, 1), got {p}")
    a, b, c, d = _ICDF_A, _ICDF_B, _ICDF_C, _ICDF_D
    if p < _ICDF_PLOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    elif p <= 1.0 - _ICDF_PLOW:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    # One Newton refinement with the accurate forward CDF.
    err = norm_cdf(x) - p
    x -= err / max(norm_pdf(x), _FPMIN)
    return x


def clopper_pearson_lower(successes: int, trials: int, confidence: float) -> float:
    """One-sided Clopper-Pearson lower confidence bound on a binomial rate.

    Returns the largest p_low such that observing ``successes`` or more
    out of ``trials`` has probability at most ``1 - confidence`` under
    Binomial(trials, p_low). Computed by bisection on the regularized
    incomplete beta identity  P[Bin(n, p) >= k] = I_p(k, n-k+1).
    """
    if trials <= 0:
        raise ArgumentError(f"trials must be positive, got {trials}")
    if not 0 <= successes <= trials:
        raise ArgumentError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < confidence < 1.0:
        raise ArgumentError(f"confidence must lie in (0, 1), got {confidence}")
    if successes == 0:
        return 0.0
    alpha = 1.0 - confidence
    k, n = successes, trials
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if reg_inc_beta(k, n - k + 1, mid) < alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def make_rng(seed) -> np.random.Generator:
    """Generator backed by the counter-based Philox bit stream.

    ``seed`` may be an int, a ``numpy.random.SeedSequence``, or an
    existing Generator (returned unchanged).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def spawn_seeds(seed: int, count: int) -> list[int]:
    """Derive ``count`` independent child seeds from a root seed.

    Deterministic: child i depends only on (seed, i), so per-item work
    can be dispatched in any order without changing results.
    """
    if count < 0:
        raise ArgumentError(f"count must be nonnegative, got {count}")
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def gaussian_sample(seed, dim: int, sigma: float) -> np.ndarray:
    """Draw one N(0, sigma^2 I_dim) vector from a fresh seeded stream."""
    if dim < 1:
        raise ArgumentError(f"dim must be >= 1, got {dim}")
    if sigma <= 0.0:
        raise ArgumentError(f"sigma must be positive, got {sigma}")
    return sigma * make_rng(seed).standard_normal(dim)
