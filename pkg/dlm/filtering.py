"""
The univariate DLM with stochastic observational variance and discounting.

One cycle per day: one_step_predictive -> kalman_update (prior to posterior)
-> evolve / evolve_block (posterior to next prior). The array-level helpers
(_update_arrays, _evolve_arrays) carry the same recursions without building
NormalGamma objects, for the long filtering loops of parameter selection.
"""
# Standard library
import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

# Third-party
import numpy as np

# First-party/Local
from dlm.distributions import NormalGamma
from dlm.exceptions import (
    AlignmentError,
    DimensionError,
    DomainError,
    NumericalDegeneracyError,
)
from dlm.special import student_t_log_density

logger = logging.getLogger(__name__)


def _check_discount(name, value):
    if not 0 < value <= 1:
        raise DomainError(f"{name} must be in (0, 1], got {value}")


@dataclass(frozen=True)
class DiscountSet:
    beta: float
    delta_phi: float
    delta_gamma: float

    def __post_init__(self):
        for name in ("beta", "delta_phi", "delta_gamma"):
            _check_discount(name, getattr(self, name))

    def replace(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return {
            "beta": self.beta,
            "delta_phi": self.delta_phi,
            "delta_gamma": self.delta_gamma,
        }


class KalmanUpdate(NamedTuple):
    posterior: NormalGamma
    forecast_error: float
    forecast_variance_factor: float


class Predictive(NamedTuple):
    dof: float
    mode: float
    scale: float


@dataclass(frozen=True)
class DlmState:
    """
    A series' filter position on day t: the prior for day t and, once the
    day's observation is in, the posterior.
    """

    prior: NormalGamma
    posterior: Optional[NormalGamma] = None
    t: int = 0

    def __post_init__(self):
        if (
            self.posterior is not None
            and self.posterior.dimension != self.prior.dimension
        ):
            raise DimensionError(
                f"prior has dimension {self.prior.dimension}, posterior "
                f"{self.posterior.dimension}"
            )

    @property
    def assimilated(self):
        return self.posterior is not None

    def assimilate(self, regressor, observation):
        posterior = kalman_update(self.prior, regressor, observation).posterior
        return replace(self, posterior=posterior)

    def advance(self, discounts):
        if self.posterior is None:
            raise AlignmentError(
                f"day {self.t} has not been assimilated yet"
            )
        prior = evolve_block(
            self.posterior,
            discounts.beta,
            discounts.delta_phi,
            discounts.delta_gamma,
        )
        return DlmState(prior=prior, t=self.t + 1)


def _regressor(prior, regressor):
    F = np.atleast_1d(np.asarray(regressor, dtype=float))
    if F.shape != (prior.dimension,):
        raise DimensionError(
            f"regressor has shape {F.shape}, prior dimension is "
            f"{prior.dimension}"
        )
    return F


def _update_arrays(a, R, r, c, F, y):
    """
    The updating recursions on plain arrays. Returns
    (m, C, n, s, e, q, f).
    """
    f = F @ a
    e = y - f
    RF = R @ F
    q = c + F @ RF
    if not q > 0:
        raise NumericalDegeneracyError(
            f"forecast variance factor q={q} is not positive"
        )
    A = RF / q
    z = (r + e * e / q) / (r + 1.0)
    m = a + e * A
    C = z * (R - q * np.outer(A, A))
    C = (C + C.T) / 2.0
    return m, C, r + 1.0, z * c, e, q, f


def _evolve_arrays(m, C, n, s, beta, delta_phi, delta_gamma):
    R = np.zeros_like(C)
    R[0, 0] = C[0, 0] / delta_phi
    R[1:, 1:] = C[1:, 1:] / delta_gamma
    return m, R, beta * n, s


def kalman_update(prior, regressor, observation):
    """
    Update `prior` = NG[a, R, r, c] with the observation y* at regressor F:

        e = y* - F'a,  q = c + F'RF,  A = RF/q,  z = (r + e^2/q)/(r + 1)
        m = a + eA,  C = z(R - qAA'),  n = r + 1,  s = zc

    C is symmetrized after the update.
    """
    F = _regressor(prior, regressor)
    m, C, n, s, e, q, _ = _update_arrays(
        prior.location,
        prior.scale_matrix,
        prior.dof,
        prior.variance_estimate,
        F,
        float(observation),
    )
    posterior = NormalGamma(
        location=m, scale_matrix=C, dof=n, variance_estimate=s
    )
    return KalmanUpdate(posterior, float(e), float(q))


def evolve(posterior, beta, delta):
    """
    Discount evolution: a = m, R = C/delta, r = beta*n, c = s.
    """
    _check_discount("beta", beta)
    _check_discount("delta", delta)
    return NormalGamma(
        location=posterior.location,
        scale_matrix=posterior.scale_matrix / delta,
        dof=beta * posterior.dof,
        variance_estimate=posterior.variance_estimate,
    )


def evolve_block(posterior, beta, delta_phi, delta_gamma):
    """
    Block-discounted evolution: the local level (first coordinate) is
    discounted by delta_phi, the coupling coefficients by delta_gamma, and
    the cross-block covariance is dropped. With a one-dimensional state this
    is evolve(posterior, beta, delta_phi).
    """
    _check_discount("beta", beta)
    _check_discount("delta_phi", delta_phi)
    _check_discount("delta_gamma", delta_gamma)
    a, R, r, c = _evolve_arrays(
        posterior.location,
        posterior.scale_matrix,
        posterior.dof,
        posterior.variance_estimate,
        beta,
        delta_phi,
        delta_gamma,
    )
    return NormalGamma(location=a, scale_matrix=R, dof=r, variance_estimate=c)


def one_step_predictive(prior, regressor):
    """
    (dof, mode, scale) of the T_r(F'a, c + F'RF) one-step predictive.
    """
    F = _regressor(prior, regressor)
    return Predictive(
        dof=prior.dof,
        mode=float(F @ prior.location),
        scale=float(prior.variance_estimate + F @ prior.scale_matrix @ F),
    )


def predictive_variance(dof, scale):
    if dof <= 2:
        raise DomainError(f"T_{dof} has no finite variance")
    return scale * dof / (dof - 2.0)


@dataclass
class FilterTrace:
    """
    Day-by-day record of a filter run: the one-step predictive on each day,
    the log density of the realized value under it, and where the filter
    ended up.
    """

    dof: np.ndarray
    mode: np.ndarray
    scale: np.ndarray
    log_density: np.ndarray
    final_posterior: Optional[NormalGamma] = None
    final_prior: Optional[NormalGamma] = None
    posterior_means: list = field(default_factory=list)

    @property
    def log_likelihood(self):
        return float(np.sum(self.log_density))


def filter_series(
    series, regressors, initial_prior, discounts, keep_means=False
):
    """
    Run the decoupled filter over `series` (length T) with row t of
    `regressors` (T x p) as F_t, starting from `initial_prior` as the prior
    of the first row. Evolution is block-discounted with `discounts`.
    """
    y = np.asarray(series, dtype=float)
    F = np.asarray(regressors, dtype=float)
    if F.ndim == 1:
        F = F[:, np.newaxis]
    if F.shape[0] != y.shape[0]:
        raise AlignmentError(
            f"{y.shape[0]} observations but {F.shape[0]} regressor rows"
        )
    if F.shape[1] != initial_prior.dimension:
        raise DimensionError(
            f"regressors have {F.shape[1]} columns, prior dimension is "
            f"{initial_prior.dimension}"
        )

    T = y.shape[0]
    dof = np.empty(T)
    mode = np.empty(T)
    scale = np.empty(T)
    means = []
    a = initial_prior.location
    R = initial_prior.scale_matrix
    r = initial_prior.dof
    c = initial_prior.variance_estimate
    m, C, n, s = a, R, r, c
    for t in range(T):
        m, C, n, s, _, q, f = _update_arrays(a, R, r, c, F[t], y[t])
        dof[t], mode[t], scale[t] = r, f, q
        if keep_means:
            means.append(m)
        a, R, r, c = _evolve_arrays(
            m,
            C,
            n,
            s,
            discounts.beta,
            discounts.delta_phi,
            discounts.delta_gamma,
        )

    trace = FilterTrace(
        dof=dof,
        mode=mode,
        scale=scale,
        log_density=student_t_log_density(y, dof, mode, scale)
        if T
        else np.empty(0),
        posterior_means=means,
    )
    if T:
        trace.final_posterior = NormalGamma(m, C, n, s)
    trace.final_prior = NormalGamma(a, R, r, c)
    return trace


def log_likelihood(
    panel_column, regressors, initial_prior, discounts, range=None
):
    """
    Sum over t in [t_start, t_end] (inclusive row indices) of
    log p(y_t | D_{t-1}), the filter starting from `initial_prior` as the
    prior of row t_start.
    """
    y = np.asarray(panel_column, dtype=float)
    F = np.asarray(regressors, dtype=float)
    if F.shape[0] != y.shape[0]:
        raise AlignmentError(
            f"{y.shape[0]} observations but {F.shape[0]} regressor rows"
        )
    t_start, t_end = (0, y.shape[0] - 1) if range is None else range
    if not 0 <= t_start <= t_end < y.shape[0]:
        raise AlignmentError(
            f"range [{t_start}, {t_end}] is outside 0..{y.shape[0] - 1}"
        )
    trace = filter_series(
        y[t_start : t_end + 1],
        F[t_start : t_end + 1],
        initial_prior,
        discounts,
    )
    return trace.log_likelihood
