import numpy as np
from django.test import SimpleTestCase
from scipy.linalg import expm

from qrc import linalg
from qrc.exceptions import NumericalError, ShapeError
from qrc.reservoir import SpinSystem, build_hamiltonian


def random_hermitian(dim, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


class HermEigTests(SimpleTestCase):
    def test_reconstructs_matrix_with_ascending_eigenvalues(self):
        h = random_hermitian(32)
        eig = linalg.herm_eig(h)
        self.assertTrue(np.all(np.diff(eig.eigenvalues) >= 0))
        np.testing.assert_allclose(eig.reconstruct(), h, atol=1e-10)
        v = eig.eigenvectors
        np.testing.assert_allclose(v.conj().T @ v, np.eye(32), atol=1e-10)

    def test_rejects_non_hermitian(self):
        a = random_hermitian(4)
        a[0, 1] += 1e-3
        with self.assertRaises(NumericalError):
            linalg.herm_eig(a)

    def test_rejects_non_square(self):
        with self.assertRaises(ShapeError):
            linalg.herm_eig(np.zeros((3, 4)))

    def test_one_by_one(self):
        eig = linalg.herm_eig([[2.5]])
        np.testing.assert_allclose(eig.eigenvalues, [2.5])

    def test_eigenvalues_sum_to_trace(self):
        h = random_hermitian(32, seed=9)
        self.assertAlmostEqual(float(np.sum(linalg.herm_eig(h).eigenvalues)), float(np.trace(h).real), places=10)


class PropagatorTests(SimpleTestCase):
    def test_matches_matrix_exponential(self):
        h = random_hermitian(16, seed=3)
        u = linalg.unitary_from_hamiltonian(h, 0.37)
        np.testing.assert_allclose(u, expm(-1j * h * 0.37), atol=1e-10)

    def test_order_twenty_taylor_on_default_reservoir(self):
        h = build_hamiltonian(SpinSystem.default())
        t = 10e-6
        step = -1j * h * t
        term = np.eye(h.shape[0], dtype=np.complex128)
        taylor = term.copy()
        for k in range(1, 21):
            term = term @ step / k
            taylor += term
        self.assertLess(np.max(np.abs(linalg.unitary_from_hamiltonian(h, t) - taylor)), 1e-8)

    def test_composition_and_identity(self):
        eig = linalg.herm_eig(random_hermitian(8, seed=7))
        np.testing.assert_allclose(eig.propagator(0.2) @ eig.propagator(0.3), eig.propagator(0.5), atol=1e-10)
        np.testing.assert_allclose(eig.propagator(0.0), np.eye(8), atol=1e-12)
        self.assertLess(linalg.unitarity_error(eig.propagator(1.3)), linalg.UNITARY_TOL)

    def test_non_finite_time(self):
        with self.assertRaises(NumericalError):
            linalg.unitary_from_hamiltonian(np.eye(2), float("nan"))


class PseudoinverseTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(11)
        # rank 30 out of 44 columns
        self.r = rng.normal(size=(160, 30)) @ rng.normal(size=(30, 44))

    def test_penrose_conditions(self):
        r = self.r
        p = linalg.pinv(r)
        np.testing.assert_allclose(r @ p @ r, r, atol=1e-8)
        np.testing.assert_allclose(p @ r @ p, p, atol=1e-8)
        np.testing.assert_allclose((r @ p).T, r @ p, atol=1e-8)
        np.testing.assert_allclose((p @ r).T, p @ r, atol=1e-8)

    def test_least_squares_matches_pinv_and_reports_rank(self):
        y = np.random.default_rng(2).normal(size=160)
        solution = linalg.least_squares_pinv(self.r, y)
        np.testing.assert_allclose(solution.weights, linalg.pinv(self.r) @ y, atol=1e-8)
        self.assertEqual(solution.effective_rank, 30)
        self.assertTrue(np.all(np.diff(solution.singular_values) <= 0))

    def test_exact_system_is_recovered(self):
        rng = np.random.default_rng(4)
        r = rng.normal(size=(64, 10))
        w = rng.normal(size=10)
        np.testing.assert_allclose(linalg.least_squares_pinv(r, r @ w).weights, w, atol=1e-10)

    def test_zero_design_gives_zero_weights(self):
        solution = linalg.least_squares_pinv(np.zeros((5, 3)), np.ones(5))
        np.testing.assert_array_equal(solution.weights, np.zeros(3))
        self.assertEqual(solution.effective_rank, 0)

    def test_explicit_tolerance_truncates(self):
        r = np.diag([10.0, 1.0, 1e-3])
        solution = linalg.least_squares_pinv(r, np.ones(3), tolerance=1e-2)
        self.assertEqual(solution.effective_rank, 2)
        np.testing.assert_allclose(solution.weights, [0.1, 1.0, 0.0])

    def test_rejects_bad_inputs(self):
        with self.assertRaises(ShapeError):
            linalg.least_squares_pinv(np.zeros((0, 3)), np.zeros(0))
        with self.assertRaises(ShapeError):
            linalg.least_squares_pinv(np.ones((4, 2)), np.ones(3))
        with self.assertRaises(NumericalError):
            linalg.least_squares_pinv(np.array([[1.0, np.nan]]), np.ones(1))
        with self.assertRaises(ShapeError):
            linalg.least_squares_pinv(np.ones((2, 2)), np.ones(2), tolerance=-1.0)


class TraceProductTests(SimpleTestCase):
    def test_matches_trace(self):
        a = random_hermitian(8, seed=1)
        b = random_hermitian(8, seed=2)
        self.assertAlmostEqual(linalg.trace_product(a, b), float(np.trace(a @ b).real), places=10)

    def test_dimension_mismatch(self):
        with self.assertRaises(ShapeError):
            linalg.trace_product(np.eye(2), np.eye(4))

    def test_kron_order(self):
        z = np.diag([1.0, -1.0])
        np.testing.assert_array_equal(linalg.kron(z, np.eye(2)).real, np.diag([1.0, 1.0, -1.0, -1.0]))

    def test_kron_mixed_product(self):
        rng = np.random.default_rng(6)
        a, b, c, d = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(4))
        np.testing.assert_allclose(linalg.kron(a, b) @ linalg.kron(c, d), linalg.kron(a @ c, b @ d), atol=1e-12)
