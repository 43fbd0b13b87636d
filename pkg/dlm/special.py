"""
Special functions behind the conjugate updates: digamma, the Student-t
predictive density and the degrees-of-freedom equation of the mean-field
(MFVB) projection.
"""
# Standard library
import math

# Third-party
import numpy as np
from scipy import optimize, special, stats

# First-party/Local
from dlm import (
    DOF_RESIDUAL_TOLERANCE,
    DOF_SEARCH_LIMITS,
    DOF_SEARCH_START,
)
from dlm.exceptions import DomainError, NoRootError


def digamma(x):
    """
    psi(x) for x > 0.
    """
    if not np.isfinite(x) or x <= 0:
        raise DomainError(f"digamma is only defined here for x > 0, got {x}")
    return float(special.digamma(x))


def student_t_log_density(y, dof, mode, scale):
    """
    Log density at y of the Student-t with `dof` degrees of freedom,
    location `mode` and squared scale `scale`, i.e. T_dof(mode, scale) in the
    forecasting notation, whose variance is scale * dof / (dof - 2).

    Accepts numpy arrays (broadcast together) as well as scalars.
    """
    if np.any(np.asarray(scale) <= 0):
        raise DomainError(f"Student-t scale must be positive, got {scale}")
    if np.any(np.asarray(dof) <= 0):
        raise DomainError(f"Student-t dof must be positive, got {dof}")
    result = stats.t.logpdf(y, df=dof, loc=mode, scale=np.sqrt(scale))
    if np.ndim(result) == 0:
        return float(result)
    return result


def gamma_log_moments(shape, rate):
    """
    (E[lambda], E[ln lambda]) for lambda ~ Gamma(shape, rate).
    """
    if shape <= 0 or rate <= 0:
        raise DomainError(
            f"Gamma shape and rate must be positive, got {shape}, {rate}"
        )
    return shape / rate, digamma(shape) - math.log(rate)


def mfvb_dof_residual(n, expected_lambda, expected_log_lambda, p_minus_d):
    return (
        math.log(n + p_minus_d)
        - special.digamma(n / 2.0)
        - p_minus_d / n
        - math.log(2.0 * expected_lambda)
        + expected_log_lambda
    )


def solve_mfvb_dof(expected_lambda, expected_log_lambda, p_minus_d):
    """
    Degrees of freedom n of the normal-gamma factor that matches the
    weighted moments of a sample, i.e. the root of

        ln(n + p - d) - psi(n/2) - (p - d)/n - ln(2 E[lam]) + E[ln lam] = 0

    The residual runs from +inf at n -> 0 down to E[ln lam] - ln E[lam] <= 0,
    so the bracket is widened from DOF_SEARCH_START until it changes sign,
    then refined with Brent's method. A sample with (nearly) constant lambda
    has no finite root; that is reported as NoRootError.
    """
    if not expected_lambda > 0:
        raise DomainError(
            f"expected_lambda must be positive, got {expected_lambda}"
        )

    def residual(n):
        return mfvb_dof_residual(
            n, expected_lambda, expected_log_lambda, p_minus_d
        )

    limit_lo, limit_hi = DOF_SEARCH_LIMITS
    # ln(n + p - d) needs a positive argument
    limit_lo = max(limit_lo, -p_minus_d + limit_lo)
    lo, hi = DOF_SEARCH_START
    lo = max(lo, limit_lo)

    while residual(lo) <= 0:
        if lo <= limit_lo:
            raise NoRootError(
                "dof equation has no sign change near zero "
                f"(E[lam]={expected_lambda}, E[ln lam]={expected_log_lambda})"
            )
        lo = max(lo / 10.0, limit_lo)
    while residual(hi) >= 0:
        if hi >= limit_hi:
            raise NoRootError(
                "dof equation has no sign change below "
                f"{limit_hi:g} (E[lam]={expected_lambda}, "
                f"E[ln lam]={expected_log_lambda}); the sample is degenerate"
            )
        hi = min(hi * 10.0, limit_hi)

    try:
        n = optimize.brentq(
            residual, lo, hi, xtol=np.finfo(float).tiny, maxiter=500
        )
    except (ValueError, RuntimeError) as error:
        raise NoRootError(f"dof equation did not converge: {error}") from error
    value = residual(n)
    if not abs(value) <= DOF_RESIDUAL_TOLERANCE:
        raise NoRootError(
            f"dof residual {value:.3g} at n={n:.6g} exceeds "
            f"{DOF_RESIDUAL_TOLERANCE:g}"
        )
    return float(n)
