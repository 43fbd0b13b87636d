"""
Synthetic panels drawn from the simultaneous model itself:

    y_t = (I - Gamma_t)^-1 (phi_t + v_t),   v_t ~ N(0, diag(1/lambda_t))

The true paths are kept alongside the panel so that selection and
forecasting can be checked against them.
"""
# Standard library
import json
import logging
from dataclasses import dataclass, field

# Third-party
import numpy as np

# First-party/Local
from dlm.exceptions import DomainError, SingularSystemError
from marketdata.panel import ReturnsPanel, business_dates
from sgdlm.coupling import ParentStructure

logger = logging.getLogger(__name__)

VOLATILITY_MODELS = ("static", "beta-shock")


@dataclass
class SyntheticTruth:
    """
    True parameter paths: phi (T, m), gamma (T, m, k) in parent-list order
    and precision (T, m).
    """

    structure: ParentStructure
    phi: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    precision: np.ndarray = field(repr=False)

    @property
    def days(self):
        return self.phi.shape[0]

    def gamma_matrix(self, t):
        structure = self.structure
        matrix = np.zeros((structure.m, structure.m))
        if structure.k:
            matrix[structure.rows, structure.columns] = self.gamma[t].ravel()
        return matrix

    def to_record(self):
        return {
            "parents": [list(sp) for sp in self.structure.parents],
            "phi": self.phi.tolist(),
            "gamma": self.gamma.tolist(),
            "precision": self.precision.tolist(),
        }

    @classmethod
    def from_record(cls, record):
        m = len(record["parents"])
        k = len(record["parents"][0])
        return cls(
            structure=ParentStructure(parents=record["parents"]),
            phi=np.array(record["phi"], dtype=float),
            gamma=np.array(record["gamma"], dtype=float).reshape(-1, m, k),
            precision=np.array(record["precision"], dtype=float),
        )

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as stream:
            json.dump(self.to_record(), stream)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as stream:
            return cls.from_record(json.load(stream))


def random_structure(m, k, rng):
    """Each series gets k distinct parents drawn uniformly from the rest."""
    if not 0 <= k <= m - 1:
        raise DomainError(f"k={k} parents is impossible with {m} series")
    parents = []
    for i in range(m):
        others = [j for j in range(m) if j != i]
        parents.append(tuple(int(j) for j in rng.choice(others, k, False)))
    return ParentStructure(parents=tuple(parents))


def generate_truth(
    structure,
    days,
    rng,
    level=0.0,
    coupling=0.6,
    precision=1.0,
    drift=0.0,
    volatility="static",
    beta=0.95,
    dof=20.0,
):
    """
    Parameter paths for `days` days. phi starts at `level` and every gamma
    at `coupling`; with `drift` > 0 both follow Gaussian random walks with
    that step size. Precision stays at `precision` ("static") or takes
    multiplicative beta shocks, lambda_t = lambda_{t-1} eta_t / beta with
    eta_t ~ Beta(beta dof / 2, (1 - beta) dof / 2) ("beta-shock").
    """
    if volatility not in VOLATILITY_MODELS:
        raise DomainError(f"unknown volatility model {volatility!r}")
    if days < 1:
        raise DomainError(f"days must be positive, got {days}")
    if drift < 0:
        raise DomainError(f"drift must be nonnegative, got {drift}")
    m, k = structure.m, structure.k

    phi = np.full((days, m), float(level))
    gamma = np.full((days, m, k), float(coupling))
    if drift > 0:
        phi += np.cumsum(rng.normal(0.0, drift, (days, m)), axis=0)
        gamma += np.cumsum(rng.normal(0.0, drift, (days, m, k)), axis=0)

    lam = np.full((days, m), float(precision))
    if volatility == "beta-shock":
        if not 0 < beta < 1:
            raise DomainError(f"beta must lie in (0, 1), got {beta}")
        shocks = rng.beta(
            beta * dof / 2.0, (1.0 - beta) * dof / 2.0, (days, m)
        )
        lam = precision * np.cumprod(shocks / beta, axis=0)

    return SyntheticTruth(
        structure=structure, phi=phi, gamma=gamma, precision=lam
    )


def simulate_synthetic(truth, rng, tickers=None, dates=None):
    """
    Draw one panel from `truth`. Every day's Gamma must have spectral
    radius below 1.
    """
    structure = truth.structure
    m = structure.m
    days = truth.days
    values = np.empty((days, m))
    identity = np.eye(m)
    for t in range(days):
        gamma = truth.gamma_matrix(t)
        radius = np.max(np.abs(np.linalg.eigvals(gamma))) if m else 0.0
        if not radius < 1.0:
            raise SingularSystemError(
                f"day {t}: spectral radius of Gamma is {radius:.4f}"
            )
        noise = rng.standard_normal(m) / np.sqrt(truth.precision[t])
        values[t] = np.linalg.solve(identity - gamma, truth.phi[t] + noise)

    if tickers is None:
        tickers = tuple(f"S{i:02d}" for i in range(m))
    if dates is None:
        dates = business_dates(days + 1)[1:]
    logger.info("simulated %d days of %d series (k=%d)", days, m, structure.k)
    return ReturnsPanel(dates=dates, tickers=tickers, values=values), truth
