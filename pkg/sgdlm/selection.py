"""
Model selection around the SGDLM cycle.

Phase 1 picks each series' simultaneous parents from a decoupled filter in
which every other series is a candidate regressor. Phase 2 picks the three
discount factors one coordinate at a time by per-series log-likelihood,
then re-runs the update half of the cycle to hand phase 3 its starting
priors. The univariate local-level baseline is selected the same way.
"""
# Standard library
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

# Third-party
import numpy as np

# First-party/Local
from dlm.distributions import NormalGamma
from dlm.exceptions import (
    DimensionError,
    DomainError,
    RangeError,
    SelectionError,
)
from dlm.filtering import (
    DiscountSet,
    filter_series,
    log_likelihood,
)
from sgdlm.coupling import ParentStructure
from sgdlm.engine import day_rng, update_only_day

logger = logging.getLogger(__name__)

FACTORS = ("beta", "delta_phi", "delta_gamma")


def starting_prior(dimension, R_phi, R_gamma, dof, variance_estimate):
    """
    a = 0, R = diag(R_phi, R_gamma, ..., R_gamma), r = dof,
    c = variance_estimate.
    """
    return NormalGamma(
        location=np.zeros(dimension),
        scale_matrix=np.diag([R_phi] + [R_gamma] * (dimension - 1)),
        dof=dof,
        variance_estimate=variance_estimate,
    )


def complete_structure(m):
    """Every series with all the others as candidate parents."""
    return ParentStructure(
        parents=tuple(
            tuple(j for j in range(m) if j != i) for i in range(m)
        )
    )


def _map(function, arguments, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(function, *zip(*arguments)))
    return [function(*args) for args in arguments]


@dataclass(frozen=True)
class ParentReport:
    """
    Candidates of one series ranked by |posterior mean of gamma|, largest
    first; the top k are its parents.
    """

    series: int
    ranking: tuple
    k: int

    @property
    def chosen(self):
        return tuple(candidate for candidate, _ in self.ranking[: self.k])


def _rank_candidates(series, candidates, effects, k):
    ranked = sorted(
        zip(candidates, (abs(float(e)) for e in effects)),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ParentReport(series=series, ranking=tuple(ranked), k=k)


def _phase1_filter(values, regressors, prior, discounts):
    trace = filter_series(values, regressors, prior, discounts)
    return trace.final_posterior.location[1:]


def select_parents(panel_values, k, initial_prior, discounts, workers=1):
    """
    Rank every other series as a candidate simultaneous parent of each
    series and keep the k largest effects. Equal effects go to the lower
    series index.
    """
    values = np.asarray(panel_values, dtype=float)
    T, m = values.shape
    if T < 2:
        raise RangeError(f"parent selection needs 2 rows, got {T}")
    if not 0 <= k <= m - 1:
        raise DimensionError(f"k={k} parents is impossible with {m} series")
    if initial_prior.dimension != m:
        raise DimensionError(
            f"the phase-1 prior needs dimension {m}, got "
            f"{initial_prior.dimension}"
        )
    structure = complete_structure(m)
    F = structure.regressor_panel(values)
    effects = _map(
        _phase1_filter,
        [
            (values[:, i], F[:, i, :], initial_prior, discounts)
            for i in range(m)
        ],
        workers,
    )
    reports = [
        _rank_candidates(i, structure.parents[i], effects[i], k)
        for i in range(m)
    ]
    logger.info("selected %d parents for each of %d series", k, m)
    return reports


def structure_from_reports(reports):
    return ParentStructure(
        parents=tuple(
            report.chosen for report in sorted(reports, key=lambda r: r.series)
        )
    )


@dataclass(frozen=True)
class DiscountGrid:
    """
    Candidate values of one discount factor; the other two are held at
    their values in `fixed`.
    """

    factor: str
    values: tuple
    fixed: DiscountSet

    def __post_init__(self):
        if self.factor not in FACTORS:
            raise DomainError(f"unknown discount factor {self.factor!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise DomainError(f"the {self.factor} grid is empty")
        if any(not 0.0 < v <= 1.0 for v in values):
            raise DomainError(f"the {self.factor} grid leaves (0, 1]")
        if list(values) != sorted(values):
            raise DomainError(f"the {self.factor} grid is not ascending")
        object.__setattr__(self, "values", values)

    def candidates(self):
        for value in self.values:
            yield self.fixed.replace(**{self.factor: value})


@dataclass
class DiscountChoice:
    factor: str
    grid: tuple
    per_series: tuple
    mean: float
    log_likelihoods: np.ndarray = field(repr=False)


def choose_from_grid(grid_values, log_likelihoods):
    """
    The grid value with the largest finite log-likelihood; the first one
    on ties.
    """
    scores = np.asarray(log_likelihoods, dtype=float)
    if not np.any(np.isfinite(scores)):
        raise SelectionError("log-likelihood is not finite at any grid point")
    scores = np.where(np.isfinite(scores), scores, -np.inf)
    return grid_values[int(np.argmax(scores))]


def _grid_log_likelihoods(values, regressors, prior, candidates, rows):
    scores = []
    for discounts in candidates:
        try:
            scores.append(
                log_likelihood(values, regressors, prior, discounts, rows)
            )
        except ArithmeticError:
            scores.append(-np.inf)
    return scores


def _priors_for(initial_prior, m):
    if isinstance(initial_prior, NormalGamma):
        return [initial_prior] * m
    priors = list(initial_prior)
    if len(priors) != m:
        raise DimensionError(f"{len(priors)} priors for {m} series")
    return priors


def select_discount(
    panel_values, grid, structure, initial_prior, rows=None, workers=1
):
    """
    For every series, the grid value of `grid.factor` that maximizes its
    log-likelihood over the inclusive row range `rows`; the value applied
    to all series is the mean of those.
    """
    values = np.asarray(panel_values, dtype=float)
    if values.shape[1] != structure.m:
        raise DimensionError(
            f"panel has {values.shape[1]} series, structure {structure.m}"
        )
    priors = _priors_for(initial_prior, structure.m)
    F = structure.regressor_panel(values)
    candidates = list(grid.candidates())
    scores = np.array(
        _map(
            _grid_log_likelihoods,
            [
                (values[:, i], F[:, i, :], priors[i], candidates, rows)
                for i in range(structure.m)
            ],
            workers,
        )
    )
    per_series = tuple(
        choose_from_grid(grid.values, row) for row in scores
    )
    choice = DiscountChoice(
        factor=grid.factor,
        grid=grid.values,
        per_series=per_series,
        mean=float(np.mean(per_series)),
        log_likelihoods=scores,
    )
    logger.info(
        "%s = %.6f (mean over %d series)",
        grid.factor,
        choice.mean,
        structure.m,
    )
    return choice


def select_discounts(
    panel_values,
    structure,
    initial_prior,
    provisional,
    grids,
    search_order=("delta_gamma", "delta_phi", "beta"),
    iterations=1,
    rows=None,
    workers=1,
):
    """
    Coordinate-wise search: each factor in `search_order` in turn, the
    others held at their current values, starting from `provisional`.
    Returns the final DiscountSet and every DiscountChoice made.
    """
    current = provisional
    choices = []
    for _ in range(iterations):
        for factor in search_order:
            grid = DiscountGrid(
                factor=factor, values=grids[factor], fixed=current
            )
            choice = select_discount(
                panel_values, grid, structure, initial_prior, rows, workers
            )
            current = current.replace(**{factor: choice.mean})
            choices.append(choice)
    return current, choices


def run_phase2(
    panel_values,
    structure,
    discounts,
    initial_priors,
    sample_size,
    seed,
    days,
    ess_floor=10.0,
):
    """
    The update half of the SGDLM cycle over the panel row indices `days`.
    Returns the final priors and the day-by-day diagnostics.
    """
    values = np.asarray(panel_values, dtype=float)
    priors = _priors_for(initial_priors, structure.m)
    diagnostics = []
    for t in days:
        result = update_only_day(
            priors,
            values[t],
            structure,
            discounts,
            sample_size,
            day_rng(seed, "phase2", t),
            ess_floor,
        )
        priors = result.next_priors
        diagnostics.append(result.diagnostics)
    return priors, diagnostics


@dataclass
class BaselineForecast:
    """
    One-step forecasts of the univariate local-level DLM; rows follow the
    test range.
    """

    y_hat: np.ndarray
    variance: np.ndarray
    discounts: list


def _baseline_series(
    values, prior, grids, train_rows, test_rows, order, provisional
):
    ones = np.ones((values.shape[0], 1))
    current = provisional
    for factor in order:
        grid = grids[factor]
        candidates = [current.replace(**{factor: v}) for v in grid]
        scores = _grid_log_likelihoods(
            values, ones, prior, candidates, train_rows
        )
        current = candidates[grid.index(choose_from_grid(grid, scores))]

    start, end = train_rows[0], test_rows[1]
    trace = filter_series(
        values[start : end + 1], ones[start : end + 1], prior, current
    )
    offset = test_rows[0] - start
    dof = trace.dof[offset:]
    if np.any(dof <= 2):
        raise DomainError("baseline predictive has no finite variance")
    scale = trace.scale[offset:]
    return trace.mode[offset:], scale * dof / (dof - 2.0), current


def dlm_baseline(
    panel_values,
    prior,
    grids,
    train_rows,
    test_rows,
    order=("delta_phi", "beta"),
    provisional=DiscountSet(beta=0.95, delta_phi=0.99, delta_gamma=0.99),
    workers=1,
):
    """
    Local-level DLM (F = 1) per series: delta (searched on the delta_phi
    grid) and beta picked by training log-likelihood, then one-step
    forecasts over the inclusive `test_rows`. The filter runs straight
    through from the first training row.
    """
    values = np.asarray(panel_values, dtype=float)
    if prior.dimension != 1:
        raise DimensionError("the baseline is a local-level model")
    if not train_rows[0] <= train_rows[1] < test_rows[0] <= test_rows[1]:
        raise RangeError(
            f"training rows {train_rows} must precede test rows {test_rows}"
        )
    grids = {
        factor: tuple(float(v) for v in grids[factor]) for factor in order
    }
    results = _map(
        _baseline_series,
        [
            (
                values[:, i],
                prior,
                grids,
                train_rows,
                test_rows,
                order,
                provisional,
            )
            for i in range(values.shape[1])
        ],
        workers,
    )
    return BaselineForecast(
        y_hat=np.column_stack([r[0] for r in results]),
        variance=np.column_stack([r[1] for r in results]),
        discounts=[r[2] for r in results],
    )
