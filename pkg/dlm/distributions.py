"""
The normal-gamma family every series' state lives in.

A NormalGamma NG[a, R, r, c] is read as

    lambda ~ Gamma(shape=r/2, rate=r*c/2)
    theta | lambda ~ Normal(a, R / (c * lambda))

which is the only reading under which the forecast factor q = c + F'RF of the
Kalman update gives the T_r(F'a, q) one-step predictive. The same four
parameters hold a prior (a, R, r, c) or a posterior (m, C, n, s).
"""
# Standard library
from dataclasses import dataclass
from functools import cached_property

# Third-party
import numpy as np

# First-party/Local
from dlm import DEFINITENESS_TOLERANCE, SYMMETRY_TOLERANCE
from dlm.exceptions import DefinitenessError, DimensionError, DomainError


def _frozen_array(value, ndim):
    array = np.array(value, dtype=float, copy=True)
    if ndim == 1:
        array = np.atleast_1d(array)
    else:
        array = np.atleast_2d(array)
    array.setflags(write=False)
    return array


def check_scale_matrix(matrix):
    """
    Raise DefinitenessError unless `matrix` is square, finite, symmetric to
    SYMMETRY_TOLERANCE (relative) and has every eigenvalue above
    DEFINITENESS_TOLERANCE times its trace.
    """
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"scale matrix must be square, {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DefinitenessError("scale matrix has non-finite entries")
    magnitude = np.max(np.abs(matrix))
    if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOLERANCE * magnitude:
        raise DefinitenessError("scale matrix is not symmetric")
    trace = np.trace(matrix)
    smallest = np.linalg.eigvalsh(matrix)[0]
    if trace <= 0 or smallest <= DEFINITENESS_TOLERANCE * trace:
        raise DefinitenessError(
            f"scale matrix is not positive-definite (smallest eigenvalue "
            f"{smallest:.3g}, trace {trace:.3g})"
        )


@dataclass(frozen=True, eq=False)
class NormalGamma:
    location: np.ndarray
    scale_matrix: np.ndarray
    dof: float
    variance_estimate: float

    def __post_init__(self):
        location = _frozen_array(self.location, 1)
        scale_matrix = _frozen_array(self.scale_matrix, 2)
        object.__setattr__(self, "location", location)
        object.__setattr__(self, "scale_matrix", scale_matrix)
        object.__setattr__(self, "dof", float(self.dof))
        object.__setattr__(
            self, "variance_estimate", float(self.variance_estimate)
        )

        if scale_matrix.shape != (location.size, location.size):
            raise DimensionError(
                f"location has length {location.size} but scale matrix is "
                f"{scale_matrix.shape}"
            )
        if not np.all(np.isfinite(location)):
            raise DomainError("location has non-finite entries")
        if not self.dof > 0:
            raise DomainError(f"dof must be positive, got {self.dof}")
        if not self.variance_estimate > 0:
            raise DomainError(
                "variance_estimate must be positive, got "
                f"{self.variance_estimate}"
            )
        check_scale_matrix(scale_matrix)

    def __eq__(self, other):
        if not isinstance(other, NormalGamma):
            return NotImplemented
        return (
            self.dof == other.dof
            and self.variance_estimate == other.variance_estimate
            and np.array_equal(self.location, other.location)
            and np.array_equal(self.scale_matrix, other.scale_matrix)
        )

    def __ne__(self, other):
        return not self == other

    @property
    def dimension(self):
        return self.location.size

    @cached_property
    def cholesky(self):
        return np.linalg.cholesky(self.scale_matrix)

    def expected_precision(self):
        """E[lambda] = 1/c."""
        return 1.0 / self.variance_estimate

    def marginal_theta_covariance(self):
        """
        Covariance of the multivariate T_r(a, R) marginal of theta.
        """
        if self.dof <= 2:
            raise DomainError(
                f"theta has no finite covariance for dof={self.dof} <= 2"
            )
        return self.scale_matrix * self.dof / (self.dof - 2.0)

    def copy(self, **changes):
        values = {
            "location": self.location,
            "scale_matrix": self.scale_matrix,
            "dof": self.dof,
            "variance_estimate": self.variance_estimate,
        }
        values.update(changes)
        return NormalGamma(**values)

    def to_record(self):
        return {
            "a": self.location.tolist(),
            "R": self.scale_matrix.tolist(),
            "r": self.dof,
            "c": self.variance_estimate,
        }

    @classmethod
    def from_record(cls, record):
        return cls(
            location=record["a"],
            scale_matrix=record["R"],
            dof=record["r"],
            variance_estimate=record["c"],
        )


@dataclass(frozen=True)
class StateDraw:
    """
    One draw of a series' state: theta = (phi, gamma_1, ..., gamma_k) with
    the gammas in parent-list order, and the observational precision.
    """

    theta: np.ndarray
    precision: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _frozen_array(self.theta, 1))
        object.__setattr__(self, "precision", float(self.precision))
        if not self.precision > 0:
            raise DomainError(
                f"precision must be positive, got {self.precision}"
            )

    @property
    def phi(self):
        return float(self.theta[0])

    @property
    def gamma(self):
        return self.theta[1:]


def draw_normal_gamma(ng, count, rng):
    """
    `count` independent draws from `ng` as arrays: (theta, precision) with
    shapes (count, p) and (count,).
    """
    if count < 1:
        raise DomainError(f"count must be a positive integer, got {count}")
    shape = ng.dof / 2.0
    rate = ng.dof * ng.variance_estimate / 2.0
    precision = rng.gamma(shape, 1.0 / rate, size=count)
    noise = rng.standard_normal((count, ng.dimension))
    spread = noise @ ng.cholesky.T
    spread /= np.sqrt(ng.variance_estimate * precision)[:, np.newaxis]
    return ng.location + spread, precision


def sample_normal_gamma(ng, count, rng):
    """
    `count` StateDraws from `ng` using the stream `rng`.
    """
    theta, precision = draw_normal_gamma(ng, count, rng)
    return [
        StateDraw(theta=t, precision=lam) for t, lam in zip(theta, precision)
    ]
