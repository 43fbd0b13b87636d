"""
The daily SGDLM cycle: forecast, naive per-series update, importance
recoupling and variational decoupling, then evolution to the next day's
priors.

Joint samples are held as stacked arrays, theta (count, m, k+1) and
precision (count, m), so that the K forecast draws and the N recoupling
draws are handled with batched LAPACK calls. Draws are taken series by
series in index order from the single stream handed in, which is what makes
a day reproducible from its seed.
"""
# Standard library
import logging
import math
from dataclasses import dataclass
from typing import Optional

# Third-party
import numpy as np

# First-party/Local
from dlm.distributions import (
    NormalGamma,
    StateDraw,
    check_scale_matrix,
    draw_normal_gamma,
)
from dlm.exceptions import (
    DefinitenessError,
    DegenerateSampleError,
    DimensionError,
    DomainError,
)
from dlm.filtering import evolve_block, kalman_update
from dlm.special import solve_mfvb_dof
from sgdlm import MAX_SINGULAR_FRACTION, PHASE_SEED_TAGS
from sgdlm.coupling import (
    JointDraw,
    assemble_gamma,
    assemble_gamma_batch,
    batch_log_determinants,
)

logger = logging.getLogger(__name__)


@dataclass
class JointSample:
    theta: np.ndarray
    precision: np.ndarray

    @classmethod
    def draw(cls, states, count, rng):
        """
        `count` draws from the product of the per-series normal-gammas.
        """
        if count < 1:
            raise DomainError(f"count must be positive, got {count}")
        theta = []
        precision = []
        for ng in states:
            t, lam = draw_normal_gamma(ng, count, rng)
            theta.append(t)
            precision.append(lam)
        return cls(
            theta=np.stack(theta, axis=1), precision=np.stack(precision, 1)
        )

    def __len__(self):
        return self.theta.shape[0]

    @property
    def phi(self):
        return self.theta[:, :, 0]

    def gammas(self, structure):
        return assemble_gamma_batch(self.theta, structure)

    def joint_draw(self, index, structure):
        states = tuple(
            StateDraw(theta=self.theta[index, i], precision=lam)
            for i, lam in enumerate(self.precision[index])
        )
        return JointDraw(
            states=states, gamma_matrix=assemble_gamma(states, structure)
        )


@dataclass
class ForecastSummary:
    """
    Monte Carlo summary of the one-step joint forecast. `draws` are the
    sampled y vectors (one row per non-singular draw).
    """

    y_hat: np.ndarray
    covariance: np.ndarray
    draws: np.ndarray
    singular_fraction: float

    @property
    def variances(self):
        return np.diag(self.covariance).copy()


@dataclass
class DayDiagnostics:
    ess: float
    kl: float
    kl_bound: float
    sample_size: int


@dataclass
class WeightedPosterior:
    """
    The recoupled posterior: joint draws from the naive posteriors with
    normalized importance weights.
    """

    sample: JointSample
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.sample),):
            raise DimensionError(
                f"{w.size} weights for {len(self.sample)} draws"
            )
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("weights must be nonnegative and sum to 1")
        self.weights = w

    def __len__(self):
        return len(self.sample)

    @property
    def ess(self):
        return _effective_sample_size(self.weights)

    def joint_draw(self, index, structure):
        return self.sample.joint_draw(index, structure)


@dataclass
class DayResult:
    next_priors: list
    forecast: Optional[ForecastSummary]
    diagnostics: DayDiagnostics
    posteriors: list


def _effective_sample_size(weights):
    n = weights.size
    if np.all(weights == weights[0]):
        return float(n)
    return float(min(max(1.0 / np.sum(weights**2), 1.0), n))


def _relative_entropy(weights):
    n = weights.size
    if np.all(weights == weights[0]):
        return 0.0
    positive = weights[weights > 0]
    kl = float(np.sum(positive * np.log(n * positive)))
    return min(max(kl, 0.0), math.log(n))


def _check_states(states, structure):
    if len(states) != structure.m:
        raise DimensionError(
            f"{len(states)} states for a structure of {structure.m} series"
        )
    for i, ng in enumerate(states):
        if ng.dimension != structure.state_dimension:
            raise DimensionError(
                f"series {i} has state dimension {ng.dimension}, structure "
                f"expects {structure.state_dimension}"
            )


def forecast_day(priors, structure, draws, rng):
    """
    Sample the joint one-step forecast y = (I - Gamma)^-1 (phi + v).

    y_hat is the Monte Carlo mean of A phi (A = (I - Gamma)^-1) and the
    covariance adds the mean of A Lambda^-1 A' to the sample covariance of
    A phi. Singular draws are dropped; if more than 1% are singular the
    prior is degenerate.
    """
    _check_states(priors, structure)
    sample = JointSample.draw(priors, draws, rng)
    m = structure.m
    noise = rng.standard_normal((draws, m)) / np.sqrt(sample.precision)

    gammas = sample.gammas(structure)
    _, _, singular = batch_log_determinants(gammas)
    singular_fraction = float(np.mean(singular))
    if singular_fraction > MAX_SINGULAR_FRACTION:
        raise DegenerateSampleError(
            f"{singular_fraction:.1%} of forecast draws have singular "
            "I - Gamma"
        )
    keep = ~singular
    if not np.any(keep):
        raise DegenerateSampleError("every forecast draw is singular")

    system = np.eye(m) - gammas[keep]
    phi = sample.phi[keep]
    root_variance = 1.0 / np.sqrt(sample.precision[keep])
    # one batched solve against [phi + v | phi | Lambda^-1/2]
    rhs = np.concatenate(
        [
            (phi + noise[keep])[:, :, np.newaxis],
            phi[:, :, np.newaxis],
            root_variance[:, np.newaxis, :] * np.eye(m),
        ],
        axis=2,
    )
    solved = np.linalg.solve(system, rhs)
    y_draws = solved[:, :, 0]
    means = solved[:, :, 1]
    B = solved[:, :, 2:]

    y_hat = means.mean(axis=0)
    covariance = np.mean(B @ np.swapaxes(B, 1, 2), axis=0)
    if means.shape[0] > 1:
        covariance = covariance + np.atleast_2d(
            np.cov(means, rowvar=False)
        )
    covariance = (covariance + covariance.T) / 2.0
    return ForecastSummary(
        y_hat=y_hat,
        covariance=covariance,
        draws=y_draws,
        singular_fraction=singular_fraction,
    )


def naive_update(priors, observations, structure):
    """
    Update every series on its own with F_i = (1, y_sp(i)).
    """
    _check_states(priors, structure)
    F = structure.regressors(observations)
    y = np.asarray(observations, dtype=float)
    return [
        kalman_update(prior, F[i], y[i]).posterior
        for i, prior in enumerate(priors)
    ]


def recouple(naive_posteriors, structure, sample_size, rng):
    """
    Draw `sample_size` joint states from the product of the naive
    posteriors and weight each by |det(I - Gamma)|, normalized. Singular
    draws get weight zero.
    """
    if sample_size < 2:
        raise DomainError(f"sample_size must be at least 2, got {sample_size}")
    _check_states(naive_posteriors, structure)
    sample = JointSample.draw(naive_posteriors, sample_size, rng)
    _, log_abs, singular = batch_log_determinants(sample.gammas(structure))
    if np.all(singular):
        raise DegenerateSampleError("every recoupling draw is singular")

    log_abs = np.where(singular, -np.inf, log_abs)
    weights = np.exp(log_abs - np.max(log_abs))
    weights /= weights.sum()
    diagnostics = DayDiagnostics(
        ess=_effective_sample_size(weights),
        kl=_relative_entropy(weights),
        kl_bound=math.log(sample_size),
        sample_size=sample_size,
    )
    return WeightedPosterior(sample=sample, weights=weights), diagnostics


def mfvb_moments(theta, precision, weights):
    """
    The weighted moments the decoupled normal-gamma of one series is fitted
    to, for draws theta (N, p), precision (N,) and weights (N,):

        m = E[lam theta] / E[lam]
        V = E[lam (theta - m)(theta - m)']
        d = E[lam (theta - m)' V^-1 (theta - m)]

    Returns (m, V, d, E[lam], E[ln lam]).
    """
    w = np.asarray(weights, dtype=float)
    lam = np.asarray(precision, dtype=float)
    theta = np.asarray(theta, dtype=float)
    expected_lambda = float(w @ lam)
    wl = w * lam
    location = wl @ theta / expected_lambda
    centred = theta - location
    V = (centred * wl[:, np.newaxis]).T @ centred
    V = (V + V.T) / 2.0
    try:
        check_scale_matrix(V)
    except DefinitenessError as error:
        raise DegenerateSampleError(
            f"weighted state covariance is singular: {error}"
        ) from error
    quadratic = np.sum(centred * np.linalg.solve(V, centred.T).T, axis=1)
    d = float(wl @ quadratic)
    expected_log_lambda = float(w @ np.log(lam))
    return location, V, d, expected_lambda, expected_log_lambda


def decouple(weighted, structure, ess_floor=10.0):
    """
    Fit one normal-gamma per series to the recoupled posterior by matching
    the moments of mfvb_moments; n solves the dof equation and
    s = (n + p - d) / (n E[lam]), C = sV.
    """
    ess = weighted.ess
    if ess < ess_floor:
        raise DegenerateSampleError(
            f"effective sample size {ess:.2f} is below {ess_floor}"
        )
    p = structure.state_dimension
    posteriors = []
    for i in range(structure.m):
        location, V, d, expected_lambda, expected_log_lambda = mfvb_moments(
            weighted.sample.theta[:, i, :],
            weighted.sample.precision[:, i],
            weighted.weights,
        )
        n = solve_mfvb_dof(expected_lambda, expected_log_lambda, p - d)
        s = (n + p - d) / (n * expected_lambda)
        C = s * V
        posteriors.append(
            NormalGamma(
                location=location,
                scale_matrix=(C + C.T) / 2.0,
                dof=n,
                variance_estimate=s,
            )
        )
    return posteriors


def _evolve_all(posteriors, discounts):
    return [
        evolve_block(
            posterior,
            discounts.beta,
            discounts.delta_phi,
            discounts.delta_gamma,
        )
        for posterior in posteriors
    ]


def update_only_day(
    priors, observations, structure, discounts, sample_size, rng, ess_floor
):
    """
    The daily cycle without the forecast: update, recouple, decouple and
    evolve.
    """
    naive = naive_update(priors, observations, structure)
    weighted, diagnostics = recouple(naive, structure, sample_size, rng)
    if diagnostics.ess < ess_floor:
        logger.warning(
            "effective sample size %.1f of %d below floor %.1f",
            diagnostics.ess,
            sample_size,
            ess_floor,
        )
    posteriors = decouple(weighted, structure, ess_floor)
    return DayResult(
        next_priors=_evolve_all(posteriors, discounts),
        forecast=None,
        diagnostics=diagnostics,
        posteriors=posteriors,
    )


def step_day(
    priors,
    observations,
    structure,
    discounts,
    forecast_draws,
    sample_size,
    rng,
    ess_floor=10.0,
):
    """
    One full day: forecast from `priors`, then assimilate `observations`
    and return the next day's priors together with the forecast and the
    recoupling diagnostics.
    """
    forecast = forecast_day(priors, structure, forecast_draws, rng)
    result = update_only_day(
        priors, observations, structure, discounts, sample_size, rng, ess_floor
    )
    result.forecast = forecast
    return result


def day_rng(seed, phase, t):
    """The stream for day t of `phase`; independent of every other day."""
    return np.random.default_rng([seed, PHASE_SEED_TAGS[phase], t])


def forecast_days(
    panel_values,
    structure,
    discounts,
    priors,
    forecast_draws,
    sample_size,
    seed,
    days,
    ess_floor=10.0,
):
    """
    Run step_day over the panel row indices `days`, yielding
    (t, DayResult). Each day draws from day_rng(seed, "phase3", t), so a
    run restarted at any day from the priors stored for it continues
    exactly as the uninterrupted run would.
    """
    values = np.asarray(panel_values, dtype=float)
    for t in days:
        result = step_day(
            priors,
            values[t],
            structure,
            discounts,
            forecast_draws,
            sample_size,
            day_rng(seed, "phase3", t),
            ess_floor,
        )
        logger.debug(
            "day %d: ess %.1f, kl %.4f",
            t,
            result.diagnostics.ess,
            result.diagnostics.kl,
        )
        yield t, result
        priors = result.next_priors
