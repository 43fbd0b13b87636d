# Standard library
import os
import tempfile

# Third-party
import numpy as np
from django.test import SimpleTestCase

# First-party/Local
from dlm.exceptions import DomainError, SingularSystemError
from marketdata.simulation import (
    SyntheticTruth,
    generate_truth,
    random_structure,
    simulate_synthetic,
)
from sgdlm.coupling import ParentStructure
from sgdlm.tests.factories import ParentStructureFactory


class RandomStructureTest(SimpleTestCase):
    def test_valid_structure(self):
        structure = random_structure(6, 2, np.random.default_rng(0))
        self.assertEqual(structure.m, 6)
        self.assertEqual(structure.k, 2)


class GenerateTruthTest(SimpleTestCase):
    def test_static_paths(self):
        truth = generate_truth(
            ParentStructureFactory(m=3, k=1),
            50,
            np.random.default_rng(1),
            level=0.001,
            coupling=0.4,
            precision=1e4,
        )
        self.assertEqual(truth.days, 50)
        np.testing.assert_array_equal(truth.phi, np.full((50, 3), 0.001))
        np.testing.assert_array_equal(truth.gamma, np.full((50, 3, 1), 0.4))
        np.testing.assert_array_equal(truth.precision, np.full((50, 3), 1e4))

    def test_beta_shock_volatility(self):
        truth = generate_truth(
            ParentStructureFactory(),
            200,
            np.random.default_rng(2),
            volatility="beta-shock",
            beta=0.95,
        )
        self.assertTrue(np.all(truth.precision > 0))
        self.assertGreater(np.std(np.log(truth.precision[:, 0])), 0)

    def test_invalid(self):
        structure = ParentStructureFactory()
        rng = np.random.default_rng()
        with self.assertRaises(DomainError):
            generate_truth(structure, 10, rng, volatility="garch")
        with self.assertRaises(DomainError):
            generate_truth(structure, 0, rng)
        with self.assertRaises(DomainError):
            generate_truth(structure, 10, rng, drift=-1.0)

    def test_gamma_matrix(self):
        truth = generate_truth(
            ParentStructure(parents=((2,), (0,), (1,))),
            3,
            np.random.default_rng(),
            coupling=0.5,
        )
        np.testing.assert_array_equal(
            truth.gamma_matrix(0),
            [[0, 0, 0.5], [0.5, 0, 0], [0, 0.5, 0]],
        )

    def test_dump_and_load(self):
        truth = generate_truth(
            ParentStructureFactory(m=4, k=2),
            20,
            np.random.default_rng(3),
            drift=0.01,
        )
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "truth.json")
            truth.dump(path)
            loaded = SyntheticTruth.load(path)
        self.assertEqual(loaded.structure, truth.structure)
        np.testing.assert_array_equal(loaded.gamma, truth.gamma)
        np.testing.assert_array_equal(loaded.phi, truth.phi)


class SimulateSyntheticTest(SimpleTestCase):
    def test_uncoupled_series_are_iid(self):
        rng = np.random.default_rng(4)
        truth = generate_truth(
            ParentStructure.independent(3),
            5000,
            rng,
            level=0.5,
            precision=4.0,
        )
        panel, _ = simulate_synthetic(truth, rng)
        means = panel.values.mean(axis=0)
        variances = panel.values.var(axis=0)
        np.testing.assert_allclose(means, 0.5, atol=0.03)
        np.testing.assert_allclose(variances, 0.25, rtol=0.06)
        self.assertLess(abs(np.corrcoef(panel.values.T)[0, 1]), 0.05)

    def test_coupled_mean(self):
        """Two series that are each other's parent: E[y] = (I - G)^-1 phi."""
        rng = np.random.default_rng(5)
        truth = generate_truth(
            ParentStructure(parents=((1,), (0,))),
            5000,
            rng,
            level=1.0,
            coupling=0.5,
            precision=100.0,
        )
        panel, _ = simulate_synthetic(truth, rng)
        np.testing.assert_allclose(panel.values.mean(axis=0), 2.0, atol=0.02)

    def test_reproducible(self):
        truth = generate_truth(
            ParentStructureFactory(), 30, np.random.default_rng(6)
        )
        first, _ = simulate_synthetic(truth, np.random.default_rng(7))
        second, _ = simulate_synthetic(truth, np.random.default_rng(7))
        self.assertEqual(first, second)
        self.assertEqual(first.tickers, ("S00", "S01", "S02"))

    def test_explosive_coupling(self):
        truth = generate_truth(
            ParentStructure(parents=((1,), (0,))),
            5,
            np.random.default_rng(),
            coupling=1.0,
        )
        with self.assertRaises(SingularSystemError):
            simulate_synthetic(truth, np.random.default_rng())
