"""
The simultaneous structure y = phi + Gamma y + v.

Series i regresses on the same-day values of its k simultaneous parents
sp(i). Gamma is the sparse m x m matrix with the coupling coefficients of
series i in row i, columns sp(i), and everything hinges on I - Gamma: it maps
(phi + v) to y and its determinant is the Jacobian that couples the
otherwise independent per-series updates.
"""
# Standard library
import math
from dataclasses import dataclass

# Third-party
import numpy as np
import scipy.linalg
import scipy.sparse
from scipy import stats

# First-party/Local
from dlm.exceptions import DimensionError, SingularSystemError
from sgdlm import DETERMINANT_FLOOR

LOG_DETERMINANT_FLOOR = math.log(DETERMINANT_FLOOR)


@dataclass(frozen=True)
class ParentStructure:
    """
    m series, each with the same number k of simultaneous parents;
    parents[i] is the ordered parent list sp(i).
    """

    parents: tuple

    def __post_init__(self):
        parents = tuple(tuple(int(j) for j in sp) for sp in self.parents)
        object.__setattr__(self, "parents", parents)
        m = len(parents)
        if m == 0:
            raise DimensionError("a parent structure needs at least 1 series")
        k = len(parents[0])
        for i, sp in enumerate(parents):
            if len(sp) != k:
                raise DimensionError(
                    f"series {i} has {len(sp)} parents, expected {k}"
                )
            if len(set(sp)) != k:
                raise DimensionError(f"series {i} has repeated parents {sp}")
            if i in sp:
                raise DimensionError(f"series {i} is its own parent")
            if any(j < 0 or j >= m for j in sp):
                raise DimensionError(
                    f"series {i} has parents outside 0..{m - 1}: {sp}"
                )

    @classmethod
    def independent(cls, m):
        """m series without parents (k = 0)."""
        return cls(parents=tuple(() for _ in range(m)))

    @property
    def m(self):
        return len(self.parents)

    @property
    def k(self):
        return len(self.parents[0])

    @property
    def state_dimension(self):
        return self.k + 1

    @property
    def rows(self):
        return np.repeat(np.arange(self.m), self.k)

    @property
    def columns(self):
        return np.array(
            [j for sp in self.parents for j in sp], dtype=int
        ).reshape(-1)

    def regressors(self, observations):
        """
        F_i = (1, y_sp(i)) for every series, as an m x (k+1) array.
        """
        y = np.asarray(observations, dtype=float)
        if y.shape != (self.m,):
            raise DimensionError(
                f"expected {self.m} observations, got shape {y.shape}"
            )
        F = np.ones((self.m, self.state_dimension))
        if self.k:
            F[:, 1:] = y[np.array(self.parents)]
        return F

    def regressor_panel(self, values):
        """
        Regressors for every row of a T x m panel: T x m x (k+1).
        """
        values = np.asarray(values, dtype=float)
        F = np.ones(values.shape + (self.state_dimension,))
        if self.k:
            F[:, :, 1:] = values[:, np.array(self.parents)]
        return F

    def relabel(self, permutation):
        """
        The same structure after series i is renamed permutation[i].
        """
        permutation = list(permutation)
        parents = [None] * self.m
        for i, sp in enumerate(self.parents):
            parents[permutation[i]] = tuple(permutation[j] for j in sp)
        return ParentStructure(parents=tuple(parents))


@dataclass(frozen=True)
class JointDraw:
    """
    One joint draw of every series' state together with its Gamma.
    """

    states: tuple
    gamma_matrix: scipy.sparse.csr_matrix


def assemble_gamma(draws, structure):
    """
    The sparse m x m Gamma of one joint draw: row i holds the gamma
    coefficients of draws[i] in the columns of its parents.
    """
    if len(draws) != structure.m:
        raise DimensionError(
            f"{len(draws)} draws for {structure.m} series"
        )
    values = []
    for i, draw in enumerate(draws):
        if draw.theta.shape != (structure.state_dimension,):
            raise DimensionError(
                f"draw {i} has {draw.theta.size} coefficients, structure "
                f"expects {structure.state_dimension}"
            )
        values.extend(draw.theta[1:])
    gamma = scipy.sparse.csr_matrix(
        (values, (structure.rows, structure.columns)),
        shape=(structure.m, structure.m),
    )
    gamma.eliminate_zeros()
    return gamma


def assemble_gamma_batch(theta, structure):
    """
    Dense Gammas for a stack of joint draws; theta has shape
    (count, m, k+1).
    """
    count = theta.shape[0]
    if theta.shape[1:] != (structure.m, structure.state_dimension):
        raise DimensionError(
            f"theta has shape {theta.shape[1:]}, structure expects "
            f"{(structure.m, structure.state_dimension)}"
        )
    gamma = np.zeros((count, structure.m, structure.m))
    if structure.k:
        gamma[:, structure.rows, structure.columns] = theta[:, :, 1:].reshape(
            count, -1
        )
    return gamma


def det_and_solve(gamma, rhs):
    """
    det(I - Gamma) and (I - Gamma)^-1 rhs from a single LU factorization.
    """
    if scipy.sparse.issparse(gamma):
        gamma = gamma.toarray()
    gamma = np.asarray(gamma, dtype=float)
    m = gamma.shape[0]
    system = np.eye(m) - gamma
    lu, piv = scipy.linalg.lu_factor(system, check_finite=True)
    diagonal = np.diag(lu)
    swaps = np.count_nonzero(piv != np.arange(m))
    det = (-1.0) ** swaps * np.prod(diagonal)
    if not abs(det) >= DETERMINANT_FLOOR:
        raise SingularSystemError(f"|det(I - Gamma)| = {abs(det):.3g}")
    return float(det), scipy.linalg.lu_solve((lu, piv), rhs)


def batch_log_determinants(gammas):
    """
    (sign, log|det|, singular) of I - Gamma for a stack of Gammas.
    """
    m = gammas.shape[-1]
    sign, log_abs = np.linalg.slogdet(np.eye(m) - gammas)
    singular = (sign == 0) | ~(log_abs >= LOG_DETERMINANT_FLOOR)
    return sign, log_abs, singular


def joint_log_density(y, phi, gamma, precision):
    """
    log N(y; A phi, A Lambda^-1 A') with A = (I - Gamma)^-1.
    """
    if scipy.sparse.issparse(gamma):
        gamma = gamma.toarray()
    _, mean = det_and_solve(gamma, phi)
    A_scaled = det_and_solve(gamma, np.diag(1.0 / np.sqrt(precision)))[1]
    covariance = A_scaled @ A_scaled.T
    return float(
        stats.multivariate_normal.logpdf(y, mean=mean, cov=covariance)
    )


def factorized_log_density(y, phi, gamma, precision):
    """
    ln|det(I - Gamma)| plus the univariate log densities of each y_i given
    its own state and its parents' values.
    """
    if scipy.sparse.issparse(gamma):
        gamma = gamma.toarray()
    y = np.asarray(y, dtype=float)
    det, _ = det_and_solve(gamma, np.zeros(y.size))
    conditional_mean = phi + gamma @ y
    return math.log(abs(det)) + float(
        np.sum(
            stats.norm.logpdf(
                y, loc=conditional_mean, scale=1.0 / np.sqrt(precision)
            )
        )
    )
