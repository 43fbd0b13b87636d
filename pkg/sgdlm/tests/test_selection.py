# Standard library
from unittest import mock

# Third-party
import numpy as np
from django.test import SimpleTestCase, tag

# First-party/Local
from dlm.exceptions import (
    DimensionError,
    DomainError,
    RangeError,
    SelectionError,
)
from dlm.filtering import DiscountSet
from dlm.tests.factories import DiscountSetFactory, NormalGammaFactory
from marketdata.config import load_run_config
from marketdata.simulation import generate_truth, simulate_synthetic
from sgdlm.coupling import ParentStructure
from sgdlm.selection import (
    DiscountGrid,
    _rank_candidates,
    choose_from_grid,
    complete_structure,
    dlm_baseline,
    run_phase2,
    select_discount,
    select_discounts,
    select_parents,
    starting_prior,
    structure_from_reports,
)
from .factories import HubStructureFactory, ParentStructureFactory

DELTA_GAMMA_GRID = (0.859, 0.894, 0.929, 0.964, 0.999)
STANDARD_BANK = (1480.0, 1495.0, 1480.0, 1471.0, 1404.0)
MTN = (1280.0, 1285.0, 1288.0, 1292.0, 1287.0)


class ChooseFromGridTest(SimpleTestCase):
    def test_reference_rows(self):
        self.assertEqual(
            choose_from_grid(DELTA_GAMMA_GRID, STANDARD_BANK), 0.894
        )
        self.assertEqual(choose_from_grid(DELTA_GAMMA_GRID, MTN), 0.964)

    def test_constant_shift(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            scores = rng.normal(0, 10, 5)
            shift = rng.uniform(-1e4, 1e4)
            self.assertEqual(
                choose_from_grid(DELTA_GAMMA_GRID, scores),
                choose_from_grid(DELTA_GAMMA_GRID, scores + shift),
            )

    def test_first_maximum_wins(self):
        self.assertEqual(
            choose_from_grid(DELTA_GAMMA_GRID, [1, 3, 3, 2, 0]), 0.894
        )

    def test_non_finite_points_are_skipped(self):
        self.assertEqual(
            choose_from_grid(
                DELTA_GAMMA_GRID, [np.nan, -np.inf, 5.0, np.nan, 4.0]
            ),
            0.929,
        )

    def test_nothing_finite(self):
        with self.assertRaises(SelectionError):
            choose_from_grid(DELTA_GAMMA_GRID, [np.nan] * 5)


class DiscountGridTest(SimpleTestCase):
    def test_candidates_vary_one_factor(self):
        fixed = DiscountSetFactory()
        grid = DiscountGrid("delta_gamma", DELTA_GAMMA_GRID, fixed)
        candidates = list(grid.candidates())
        self.assertEqual(
            [c.delta_gamma for c in candidates], list(DELTA_GAMMA_GRID)
        )
        for candidate in candidates:
            self.assertEqual(candidate.beta, fixed.beta)
            self.assertEqual(candidate.delta_phi, fixed.delta_phi)

    def test_invalid(self):
        fixed = DiscountSetFactory()
        for factor, values in (
            ("gamma", DELTA_GAMMA_GRID),
            ("beta", ()),
            ("beta", (0.9, 1.2)),
            ("beta", (0.0, 0.9)),
            ("beta", (0.99, 0.9)),
        ):
            with self.subTest(factor=factor, values=values):
                with self.assertRaises(DomainError):
                    DiscountGrid(factor, values, fixed)


def _tabulated_log_likelihood(values, regressors, prior, discounts, rows):
    row = STANDARD_BANK if values[0] == 0.0 else MTN
    return row[DELTA_GAMMA_GRID.index(discounts.delta_gamma)]


class SelectDiscountTest(SimpleTestCase):
    def setUp(self):
        self.panel = np.column_stack([np.zeros(10), np.ones(10)])
        self.structure = ParentStructure.independent(2)
        self.prior = NormalGammaFactory(dimension=1)

    @mock.patch(
        "sgdlm.selection.log_likelihood",
        side_effect=_tabulated_log_likelihood,
    )
    def test_reference_rows(self, log_likelihood):
        grid = DiscountGrid(
            "delta_gamma", DELTA_GAMMA_GRID, DiscountSetFactory()
        )
        choice = select_discount(
            self.panel, grid, self.structure, self.prior, rows=(2, 9)
        )
        self.assertEqual(choice.per_series, (0.894, 0.964))
        self.assertAlmostEqual(choice.mean, 0.929)
        self.assertEqual(choice.log_likelihoods.shape, (2, 5))
        self.assertEqual(log_likelihood.call_count, 10)
        self.assertEqual(log_likelihood.call_args[0][4], (2, 9))

    @mock.patch(
        "sgdlm.selection.log_likelihood",
        side_effect=ArithmeticError("overflow"),
    )
    def test_failing_everywhere(self, log_likelihood):
        grid = DiscountGrid(
            "delta_gamma", DELTA_GAMMA_GRID, DiscountSetFactory()
        )
        with self.assertRaises(SelectionError):
            select_discount(self.panel, grid, self.structure, self.prior)

    def test_real_filter(self):
        rng = np.random.default_rng(1)
        panel = rng.normal(0, 0.01, size=(120, 3))
        structure = ParentStructureFactory(m=3, k=1)
        grid = DiscountGrid("beta", (0.9, 0.95, 0.99), DiscountSetFactory())
        choice = select_discount(
            panel, grid, structure, NormalGammaFactory(dimension=2)
        )
        self.assertEqual(len(choice.per_series), 3)
        for value in choice.per_series:
            self.assertIn(value, grid.values)
        self.assertTrue(np.all(np.isfinite(choice.log_likelihoods)))

    def test_panel_width(self):
        grid = DiscountGrid("beta", (0.9, 0.95), DiscountSetFactory())
        with self.assertRaises(DimensionError):
            select_discount(
                np.zeros((5, 3)),
                grid,
                self.structure,
                self.prior,
            )


class SelectDiscountsTest(SimpleTestCase):
    def test_coordinate_order_and_carry_over(self):
        seen = []
        means = {"delta_gamma": 0.9, "delta_phi": 0.97, "beta": 0.96}

        def fake_select(panel, grid, structure, prior, rows, workers):
            seen.append((grid.factor, grid.fixed))
            choice = mock.Mock()
            choice.mean = means[grid.factor]
            return choice

        provisional = DiscountSet(0.95, 0.99, 0.99)
        grids = {factor: (0.9, 0.95) for factor in means}
        with mock.patch(
            "sgdlm.selection.select_discount", side_effect=fake_select
        ):
            final, choices = select_discounts(
                np.zeros((4, 2)),
                ParentStructure.independent(2),
                NormalGammaFactory(dimension=1),
                provisional,
                grids,
            )
        self.assertEqual(
            [factor for factor, _ in seen],
            ["delta_gamma", "delta_phi", "beta"],
        )
        self.assertEqual(seen[0][1], provisional)
        self.assertEqual(seen[1][1], DiscountSet(0.95, 0.99, 0.9))
        self.assertEqual(seen[2][1], DiscountSet(0.95, 0.97, 0.9))
        self.assertEqual(final, DiscountSet(0.96, 0.97, 0.9))
        self.assertEqual(len(choices), 3)


class RankCandidatesTest(SimpleTestCase):
    def test_largest_effects_win(self):
        report = _rank_candidates(3, (0, 1, 2), (0.30, -0.42, 0.10), 1)
        self.assertEqual(report.chosen, (1,))
        report = _rank_candidates(3, (0, 1, 2), (0.30, -0.42, 0.10), 2)
        self.assertEqual(report.chosen, (1, 0))
        self.assertAlmostEqual(report.ranking[0][1], 0.42)

    def test_ties_go_to_the_lower_index(self):
        report = _rank_candidates(0, (4, 2, 3), (0.5, -0.5, 0.1), 1)
        self.assertEqual(report.chosen, (2,))

    def test_no_parents(self):
        report = _rank_candidates(0, (1, 2), (0.5, 0.1), 0)
        self.assertEqual(report.chosen, ())


class SelectParentsTest(SimpleTestCase):
    def _hub_panel(self, m, days, seed):
        rng = np.random.default_rng(seed)
        truth = generate_truth(
            HubStructureFactory(m=m), days, rng, coupling=0.6, precision=1.0
        )
        panel, _ = simulate_synthetic(truth, rng)
        return panel.values

    def _select(self, values, k):
        m = values.shape[1]
        return select_parents(
            values,
            k,
            starting_prior(m, 1.0, 1.0, 5.0, 1.0),
            DiscountSet(beta=1.0, delta_phi=1.0, delta_gamma=1.0),
        )

    def test_recovers_hub_parents(self):
        reports = self._select(self._hub_panel(4, 400, 2), 1)
        structure = structure_from_reports(reports)
        self.assertEqual(structure, HubStructureFactory(m=4))
        for report in reports:
            self.assertEqual(len(report.ranking), 3)

    @tag("slow")
    def test_recovers_hub_parents_across_seeds(self):
        for seed in range(10):
            reports = self._select(self._hub_panel(5, 1000, seed), 1)
            self.assertEqual(
                structure_from_reports(reports), HubStructureFactory(m=5)
            )

    @tag("slow")
    def test_hub_parents_with_run_defaults(self):
        """
        The prior and discounts phase1 takes from the run defaults, 500
        days at coupling 0.6: at least 90% of the parents are found.
        """
        config = load_run_config()
        prior = starting_prior(
            5,
            config.prior["R_phi"],
            config.prior["R_gamma"],
            config.prior["r0"],
            config.prior["c0"],
        )
        truth = HubStructureFactory(m=5)
        found = 0
        for seed in range(10):
            reports = select_parents(
                self._hub_panel(5, 500, seed), 1, prior, config.discounts
            )
            found += sum(
                report.chosen == truth.parents[report.series]
                for report in reports
            )
        self.assertGreaterEqual(found, 45)

    def test_relabelling_the_panel(self):
        values = self._hub_panel(4, 200, 3)
        permutation = [2, 0, 3, 1]
        # series i of the original panel is column permutation[i]
        shuffled = np.empty_like(values)
        shuffled[:, permutation] = values
        original = structure_from_reports(self._select(values, 2))
        relabelled = structure_from_reports(self._select(shuffled, 2))
        for i in range(4):
            self.assertEqual(
                set(relabelled.parents[permutation[i]]),
                {permutation[j] for j in original.parents[i]},
            )

    def test_invalid(self):
        prior = starting_prior(3, 1.0, 1.0, 5.0, 1.0)
        discounts = DiscountSetFactory()
        with self.assertRaises(RangeError):
            select_parents(np.zeros((1, 3)), 1, prior, discounts)
        with self.assertRaises(DimensionError):
            select_parents(np.zeros((5, 3)), 3, prior, discounts)
        with self.assertRaises(DimensionError):
            select_parents(np.zeros((5, 4)), 1, prior, discounts)


class CompleteStructureTest(SimpleTestCase):
    def test_every_other_series(self):
        self.assertEqual(
            complete_structure(3).parents, ((1, 2), (0, 2), (0, 1))
        )


class RunPhase2Test(SimpleTestCase):
    def test_no_days(self):
        prior = NormalGammaFactory(dimension=2)
        priors, diagnostics = run_phase2(
            np.zeros((3, 3)),
            ParentStructureFactory(),
            DiscountSetFactory(),
            prior,
            100,
            0,
            range(0),
        )
        self.assertEqual(priors, [prior] * 3)
        self.assertEqual(diagnostics, [])

    def test_reproducible(self):
        rng = np.random.default_rng(4)
        values = rng.normal(0, 0.01, size=(5, 3))
        arguments = (
            values,
            ParentStructureFactory(),
            DiscountSetFactory(),
            NormalGammaFactory(dimension=2),
            200,
            11,
            range(5),
        )
        first, first_diagnostics = run_phase2(*arguments)
        second, second_diagnostics = run_phase2(*arguments)
        self.assertEqual(first, second)
        self.assertEqual(first_diagnostics, second_diagnostics)
        self.assertEqual(len(first_diagnostics), 5)


class DlmBaselineTest(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(5)
        self.values = 0.001 + rng.normal(0, 0.01, size=(60, 2))
        self.prior = starting_prior(1, 0.0001, 0.0, 5.0, 0.0001)
        self.grids = {
            "delta_phi": (0.9, 0.95, 0.99),
            "beta": (0.9, 0.95, 0.99),
        }

    def test_shapes(self):
        baseline = dlm_baseline(
            self.values, self.prior, self.grids, (0, 39), (40, 59)
        )
        self.assertEqual(baseline.y_hat.shape, (20, 2))
        self.assertEqual(baseline.variance.shape, (20, 2))
        self.assertTrue(np.all(baseline.variance > 0))
        self.assertEqual(len(baseline.discounts), 2)
        for discounts in baseline.discounts:
            self.assertIn(discounts.beta, self.grids["beta"])
            self.assertIn(discounts.delta_phi, self.grids["delta_phi"])

    def test_rows_must_not_overlap(self):
        with self.assertRaises(RangeError):
            dlm_baseline(
                self.values, self.prior, self.grids, (0, 40), (40, 59)
            )

    def test_local_level_only(self):
        with self.assertRaises(DimensionError):
            dlm_baseline(
                self.values,
                NormalGammaFactory(dimension=2),
                self.grids,
                (0, 39),
                (40, 59),
            )
