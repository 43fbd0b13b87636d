# Standard library
import math
import warnings

# Third-party
import numpy as np
from django.test import SimpleTestCase

# First-party/Local
from dlm.distributions import StateDraw
from dlm.exceptions import DimensionError, SingularSystemError
from sgdlm.coupling import (
    ParentStructure,
    assemble_gamma,
    assemble_gamma_batch,
    batch_log_determinants,
    det_and_solve,
    factorized_log_density,
    joint_log_density,
)
from .factories import ParentStructureFactory


def _random_parents(m, k, rng):
    parents = []
    for i in range(m):
        others = [j for j in range(m) if j != i]
        parents.append(tuple(rng.choice(others, k, replace=False)))
    return ParentStructure(parents=tuple(parents))


class ParentStructureTest(SimpleTestCase):
    def test_shape(self):
        structure = ParentStructureFactory(m=4, k=2)
        self.assertEqual(structure.m, 4)
        self.assertEqual(structure.k, 2)
        self.assertEqual(structure.state_dimension, 3)
        self.assertEqual(structure.parents[3], (0, 1))

    def test_invalid(self):
        with self.assertRaises(DimensionError):
            ParentStructure(parents=((0,), (0,)))
        with self.assertRaises(DimensionError):
            ParentStructure(parents=((1, 1), (0, 2), (0, 1)))
        with self.assertRaises(DimensionError):
            ParentStructure(parents=((1,), (0, 2), (0,)))
        with self.assertRaises(DimensionError):
            ParentStructure(parents=((2,), (0,)))
        with self.assertRaises(DimensionError):
            ParentStructure(parents=())

    def test_independent(self):
        structure = ParentStructure.independent(3)
        self.assertEqual(structure.k, 0)
        np.testing.assert_array_equal(
            structure.regressors([0.1, 0.2, 0.3]), np.ones((3, 1))
        )

    def test_regressors(self):
        structure = ParentStructureFactory(m=3, k=1)
        np.testing.assert_array_equal(
            structure.regressors([0.1, 0.2, 0.3]),
            [[1.0, 0.2], [1.0, 0.3], [1.0, 0.1]],
        )
        with self.assertRaises(DimensionError):
            structure.regressors([0.1, 0.2])

    def test_regressor_panel(self):
        structure = ParentStructureFactory(m=3, k=2)
        values = np.arange(12.0).reshape(4, 3)
        panel = structure.regressor_panel(values)
        self.assertEqual(panel.shape, (4, 3, 3))
        for t in range(4):
            np.testing.assert_array_equal(
                panel[t], structure.regressors(values[t])
            )

    def test_relabel(self):
        structure = ParentStructure(parents=((1,), (2,), (1,)))
        relabeled = structure.relabel([2, 0, 1])
        # old series 0 (now 2) had parent 1 (now 0)
        self.assertEqual(relabeled.parents, ((1,), (0,), (0,)))


class AssembleGammaTest(SimpleTestCase):
    def test_placements(self):
        structure = ParentStructureFactory(m=3, k=2)
        draws = [
            StateDraw(theta=[0.0, 0.1 * (i + 1), -0.2 * (i + 1)], precision=1)
            for i in range(3)
        ]
        gamma = assemble_gamma(draws, structure)
        self.assertEqual(gamma.shape, (3, 3))
        self.assertEqual(gamma.nnz, 6)
        self.assertEqual(gamma[0, 1], 0.1)
        self.assertEqual(gamma[0, 2], -0.2)
        self.assertAlmostEqual(gamma[2, 0], 0.3)
        self.assertAlmostEqual(gamma[2, 1], -0.6)
        np.testing.assert_array_equal(gamma.diagonal(), np.zeros(3))

    def test_dimension_mismatch(self):
        structure = ParentStructureFactory(m=2, k=1)
        with self.assertRaises(DimensionError):
            assemble_gamma(
                [StateDraw(theta=[0.0, 0.1], precision=1)], structure
            )
        with self.assertRaises(DimensionError):
            assemble_gamma(
                [StateDraw(theta=[0.0], precision=1)] * 2, structure
            )

    def test_batch_matches_sparse(self):
        rng = np.random.default_rng(4)
        structure = ParentStructureFactory(m=4, k=2)
        theta = rng.normal(size=(5, 4, 3))
        batch = assemble_gamma_batch(theta, structure)
        for n in range(5):
            draws = [
                StateDraw(theta=theta[n, i], precision=1) for i in range(4)
            ]
            np.testing.assert_array_equal(
                batch[n], assemble_gamma(draws, structure).toarray()
            )


class DetAndSolveTest(SimpleTestCase):
    def test_two_cycle(self):
        det, x = det_and_solve(np.array([[0.0, 0.5], [0.5, 0.0]]), [1.0, 1.0])
        self.assertAlmostEqual(det, 0.75, places=14)
        np.testing.assert_allclose(x, [2.0, 2.0], rtol=1e-14)

    def test_no_coupling(self):
        det, x = det_and_solve(np.zeros((3, 3)), [1.0, 2.0, 3.0])
        self.assertEqual(det, 1.0)
        np.testing.assert_array_equal(x, [1.0, 2.0, 3.0])

    def test_sign_follows_pivoting(self):
        gamma = np.array([[0.0, 2.0], [2.0, 0.0]])
        det, _ = det_and_solve(gamma, [1.0, 0.0])
        self.assertAlmostEqual(det, np.linalg.det(np.eye(2) - gamma))
        self.assertLess(det, 0)

    def test_singular(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with self.assertRaises(SingularSystemError):
                det_and_solve(np.array([[0.0, 1.0], [1.0, 0.0]]), [1.0, 1.0])

    def test_batch_log_determinants(self):
        rng = np.random.default_rng(8)
        gammas = rng.uniform(-0.4, 0.4, size=(20, 3, 3))
        gammas[:, [0, 1, 2], [0, 1, 2]] = 0.0
        gammas[0] = [[0, 1, 0], [1, 0, 0], [0, 0, 0]]
        sign, log_abs, singular = batch_log_determinants(gammas)
        self.assertTrue(singular[0])
        self.assertFalse(np.any(singular[1:]))
        for n in range(1, 20):
            det, _ = det_and_solve(gammas[n], np.zeros(3))
            self.assertAlmostEqual(sign[n] * math.exp(log_abs[n]), det)


class FactorizationTest(SimpleTestCase):
    def test_joint_density_factorizes(self):
        """
        The joint density of y is |det(I - Gamma)| times the product of the
        per-series conditionals.
        """
        rng = np.random.default_rng(18)
        for m in (2, 3, 4):
            for _ in range(100):
                k = int(rng.integers(1, m))
                structure = _random_parents(m, k, rng)
                draws = [
                    StateDraw(
                        theta=np.concatenate(
                            [rng.normal(size=1), rng.uniform(-0.4, 0.4, k)]
                        ),
                        precision=rng.gamma(3.0, 1.0),
                    )
                    for _ in range(m)
                ]
                gamma = assemble_gamma(draws, structure)
                phi = np.array([d.phi for d in draws])
                precision = np.array([d.precision for d in draws])
                y = rng.normal(size=m)
                self.assertAlmostEqual(
                    joint_log_density(y, phi, gamma, precision),
                    factorized_log_density(y, phi, gamma, precision),
                    delta=1e-10,
                )
