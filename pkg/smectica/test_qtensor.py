# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

import math
import unittest

import numpy as np

from smectica.exceptions import ArgumentError, ConstraintError, ParameterError
from smectica.grid import GridSpec
from smectica.qtensor import (
	QField,
	Qsquared,
	dev,
	from_full,
	frobenius_inner,
	largest_eigenvalue,
	m_tensor,
	n_components,
	pointwise_norm,
	sup_frobenius,
	to_full,
	trace,
	trQ2,
	trQ3,
	uniaxial,
)


def random_q(grid, seed=0, scale=1.0):
	rng = np.random.default_rng(seed)
	return QField(grid, scale * rng.standard_normal((n_components(grid.d),) + grid.shape))


def uniform_director(grid, n):
	n = np.asarray(n, dtype=float) / np.linalg.norm(n)
	return np.stack([np.full(grid.shape, c) for c in n])


class TestPacking(unittest.TestCase):
	def test_zero_round_trip(self):
		grid = GridSpec(3, 4, 1.0)
		Q = QField.zeros(grid)
		self.assertEqual(np.max(np.abs(to_full(Q))), 0.0)
		self.assertEqual(np.max(np.abs(from_full(to_full(Q), grid).comps)), 0.0)

	def test_2d_packing_rule(self):
		grid = GridSpec(2, 4, 1.0)
		Q = QField(grid, np.stack([np.full(grid.shape, 0.3), np.full(grid.shape, -0.1)]))
		M = to_full(Q)
		np.testing.assert_array_equal(M[:, :, 1, 2], [[0.3, -0.1], [-0.1, -0.3]])

	def test_round_trip_is_exact(self):
		for d in (2, 3):
			grid = GridSpec(d, 5, 1.0)
			Q = random_q(grid, seed=d)
			np.testing.assert_array_equal(from_full(to_full(Q), grid).comps, Q.comps)
			self.assertEqual(np.max(np.abs(trace(to_full(Q)))), 0.0)

	def test_from_full_rejects_trace(self):
		grid = GridSpec(2, 4, 1.0)
		M = to_full(random_q(grid))
		M[0, 0] += 0.5
		with self.assertRaises(ConstraintError):
			from_full(M, grid)

	def test_from_full_projects_roundoff_trace(self):
		grid = GridSpec(2, 4, 1.0)
		M = to_full(random_q(grid))
		M[0, 0] *= 1 + 1e-13
		Q = from_full(M, grid)
		self.assertEqual(np.max(np.abs(trace(to_full(Q)))), 0.0)

	def test_arithmetic_stays_closed(self):
		grid = GridSpec(3, 4, 1.0)
		P, Q = random_q(grid, 1), random_q(grid, 2)
		R = 2.0 * P - Q / 3.0
		self.assertEqual(np.max(np.abs(trace(to_full(R)))), 0.0)
		with self.assertRaises(ArgumentError):
			P + random_q(GridSpec(3, 6, 1.0))


class TestAlgebra(unittest.TestCase):
	def test_dev(self):
		grid = GridSpec(3, 4, 1.0)
		eye = np.zeros((3, 3) + grid.shape)
		for i in range(3):
			eye[i, i] = 1.0
		self.assertEqual(np.max(np.abs(dev(eye))), 0.0)
		D = np.zeros_like(eye)
		for i, v in enumerate((1.0, 2.0, 3.0)):
			D[i, i] = v
		out = dev(D)
		np.testing.assert_allclose([out[i, i, 0, 0, 0] for i in range(3)], [-1.0, 0.0, 1.0])
		M = to_full(random_q(grid))
		np.testing.assert_allclose(dev(M), M, atol=1e-15)
		A = np.random.default_rng(5).standard_normal((3, 3) + grid.shape)
		np.testing.assert_allclose(dev(dev(A)), dev(A), atol=1e-14)

	def test_traces(self):
		grid = GridSpec(3, 4, 1.0)
		Q = QField.zeros(grid)
		self.assertEqual(np.max(trQ2(Q)), 0.0)
		self.assertEqual(np.max(np.abs(trQ3(Q))), 0.0)
		Q = uniaxial(uniform_director(grid, (1.0, 2.0, -0.5)), 1.0, grid)
		np.testing.assert_allclose(trQ2(Q), 2.0 / 3.0, rtol=1e-13)
		np.testing.assert_allclose(trQ3(Q), 2.0 / 9.0, rtol=1e-12)

	def test_trQ2_is_frobenius_square(self):
		for d in (2, 3):
			grid = GridSpec(d, 4, 1.0)
			Q = random_q(grid, seed=10 + d)
			np.testing.assert_allclose(trQ2(Q), pointwise_norm(to_full(Q)) ** 2, rtol=1e-13)
			np.testing.assert_allclose(trace(Qsquared(Q)), trQ2(Q), rtol=1e-13)

	def test_trQ3_requires_3d(self):
		with self.assertRaises(ArgumentError):
			trQ3(QField.zeros(GridSpec(2, 4, 1.0)))

	def test_m_tensor(self):
		grid = GridSpec(2, 4, 1.0)
		M = m_tensor(QField.zeros(grid), 1.0)
		np.testing.assert_allclose(pointwise_norm(M) ** 2, 0.5)
		n = uniform_director(grid, (0.6, 0.8))
		M = m_tensor(uniaxial(n, 1.7, grid), 1.7)
		np.testing.assert_allclose(M, np.einsum("i...,j...->ij...", n, n), atol=1e-15)
		M = m_tensor(random_q(GridSpec(3, 4, 1.0)), 0.8)
		np.testing.assert_allclose(trace(M), 1.0, atol=1e-14)
		with self.assertRaises(ParameterError):
			m_tensor(QField.zeros(grid), 0.0)

	def test_largest_eigenvalue(self):
		for d in (2, 3):
			grid = GridSpec(d, 4, 1.0)
			Q = random_q(grid, seed=20 + d)
			expected = np.linalg.eigvalsh(np.moveaxis(to_full(Q), (0, 1), (-2, -1)))[..., -1]
			np.testing.assert_allclose(largest_eigenvalue(Q), expected, atol=1e-13)


class TestFrobenius(unittest.TestCase):
	def test_uniform_2d(self):
		grid = GridSpec(2, 4, 1.0)
		Q = QField(grid, np.stack([np.full(grid.shape, 0.3), np.full(grid.shape, -0.1)]))
		self.assertAlmostEqual(frobenius_inner(Q, Q), 0.2, places=14)
		self.assertEqual(frobenius_inner(QField.zeros(grid), QField.zeros(grid)), 0.0)

	def test_compact_matches_full(self):
		for d in (2, 3):
			grid = GridSpec(d, 4, 1.3)
			P, Q = random_q(grid, 30 + d), random_q(grid, 40 + d)
			compact = frobenius_inner(P, Q)
			full = frobenius_inner(to_full(P), to_full(Q), grid)
			self.assertLessEqual(abs(compact - full), 1e-13 * abs(full))

	def test_sup_bounds_mean(self):
		grid = GridSpec(3, 4, 2.0)
		Q = random_q(grid, 50)
		self.assertGreaterEqual(sup_frobenius(Q) ** 2, frobenius_inner(Q, Q) / grid.volume)
		uniform = uniaxial(uniform_director(grid, (0.0, 0.0, 1.0)), 1.0, grid)
		self.assertAlmostEqual(sup_frobenius(uniform), math.sqrt(2.0 / 3.0), places=14)
