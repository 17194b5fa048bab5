# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

import math
import unittest

import numpy as np

from smectica.energy import ModelParams
from smectica.exceptions import ArgumentError
from smectica.grid import GridSpec, biharmonic, inner, laplacian
from smectica.qtensor import QField, frobenius_inner
from smectica.spectral import (
	ModeCoeffs,
	SpectralPlan,
	etd_update,
	parseval_check,
	phi1,
	q1fun,
	qfun,
	quasi_implicit_update,
	weighted_norm,
)


def make_params(**overrides):
	values = dict(d=2, K=0.1, A=-1.0, C=2.0, a=-5.0, b=0.0, c=5.0, q=5.0, B0=7e-5, kappa1=8.0, kappa2=8.0)
	values.update(overrides)
	return ModelParams(**values)


class TestScalarFunctions(unittest.TestCase):
	def test_limits(self):
		self.assertEqual(phi1(0.0), 1.0)
		self.assertEqual(qfun(0.0), 1.0)
		self.assertEqual(q1fun(0.0), 1.0)
		self.assertAlmostEqual(phi1(-1e-12), 1 - 5e-13, delta=1e-15)
		self.assertAlmostEqual(qfun(1e-12), 1 - 5e-13, delta=1e-15)
		self.assertEqual(q1fun(1e-12), 1.0)

	def test_known_value(self):
		self.assertAlmostEqual(qfun(1.0), 1 / (math.e - 1), places=14)
		self.assertAlmostEqual(qfun(1.0), 0.581977, places=6)
		self.assertEqual(qfun(1e3), 0.0)

	def test_key_identity(self):
		for z in np.logspace(-12, 3, 61):
			value = (qfun(z) + z) * phi1(-z)
			self.assertLessEqual(abs(value - 1.0), 1e-12, msg=f"z={z}")

	def test_ranges(self):
		z = np.logspace(-8, 2, 40)
		self.assertTrue(np.all((qfun(z) > 0) & (qfun(z) <= 1)))
		self.assertTrue(np.all(q1fun(z) >= 1))

	def test_q1_lower_bound_near_zero(self):
		z = np.logspace(-16, -1, 2000)
		self.assertTrue(np.all(q1fun(z) >= 1))
		self.assertTrue(np.all(qfun(z) <= 1))
		np.testing.assert_allclose(q1fun(z) - 1, z * z / 12 - z**4 / 720, rtol=1e-6, atol=4e-16)

	def test_series_matches_closed_form(self):
		for z in (1e-4 * (1 - 1e-9), 1e-4, 2e-4):
			self.assertAlmostEqual(qfun(z), z / math.expm1(z), delta=1e-15)

	def test_vectorised(self):
		z = np.array([0.0, 0.5, 2.0])
		np.testing.assert_allclose(qfun(z), [1.0, 0.5 / math.expm1(0.5), 2.0 / math.expm1(2.0)], rtol=1e-15)


class TestPlan(unittest.TestCase):
	def test_eigenvalue_table(self):
		for d, J in ((2, 8), (2, 7), (3, 6)):
			grid = GridSpec(d, J, 1.9)
			plan = SpectralPlan(grid)
			self.assertEqual(plan.lambda_lap.flat[0], 0.0)
			self.assertTrue(np.all(plan.lambda_lap >= 0))
			coords = grid.coordinates
			for index in np.ndindex(plan.spectral_shape):
				wave = np.cos(sum(2 * math.pi * k * x / grid.L for k, x in zip(index, coords, strict=True)))
				np.testing.assert_allclose(
					laplacian(wave, grid), -plan.lambda_lap[index] * wave, atol=1e-10 / grid.h**2
				)

	def test_symbol_symmetry(self):
		J = 8
		full = (4.0 / (1.0 / J) ** 2) * np.sin(np.pi * np.arange(J) / J) ** 2
		np.testing.assert_allclose(full[1:], full[1:][::-1], rtol=1e-14)

	def test_round_trip(self):
		grid = GridSpec(2, 16, 2.0)
		plan = SpectralPlan(grid)
		f = np.random.default_rng(1).standard_normal((3,) + grid.shape)
		np.testing.assert_allclose(plan.inverse(plan.forward(f)), f, atol=1e-13 * np.max(np.abs(f)))

	def test_parseval(self):
		grid = GridSpec(2, 16, 2.0)
		plan = SpectralPlan(grid)
		self.assertLessEqual(parseval_check(np.full(grid.shape, 1.7), plan), 1e-14)
		f = np.random.default_rng(2).standard_normal(grid.shape)
		self.assertLessEqual(parseval_check(f, plan), 1e-12)
		x, _ = grid.coordinates
		s = np.sin(2 * math.pi * x / grid.L)
		self.assertAlmostEqual(plan.spectral_sum(plan.forward(s)), grid.volume / 2, places=12)
		Q = QField(GridSpec(3, 6, 1.0), np.random.default_rng(3).standard_normal((5, 6, 6, 6)))
		self.assertLessEqual(parseval_check(Q, SpectralPlan(Q.grid)), 1e-12)

	def test_symbols_are_positive(self):
		plan = SpectralPlan(GridSpec(2, 8, 1.0))
		p = make_params()
		for kind in ("L", "D"):
			coeffs = plan.coeffs(kind, 0.7, p)
			self.assertTrue(np.all(coeffs.sigma > 0))
			self.assertTrue(np.all(coeffs.decay(0.1) < 1))
		with self.assertRaises(ArgumentError):
			plan.coeffs("X", 1.0, p)

	def test_symbols_match_operators(self):
		grid = GridSpec(2, 8, 1.0)
		plan = SpectralPlan(grid)
		p = make_params(kappa1=0.0, kappa2=0.0)
		f = np.random.default_rng(4).standard_normal(grid.shape)
		L = plan.coeffs("L", 1.0, p)
		D = plan.coeffs("D", 1.0, p)
		np.testing.assert_allclose(
			plan.inverse(L.sigma * plan.forward(f)), -p.K * laplacian(f, grid), atol=1e-10
		)
		np.testing.assert_allclose(
			plan.inverse(D.sigma * plan.forward(f)), 2 * p.B0 * biharmonic(f, grid), atol=1e-9
		)


class TestUpdates(unittest.TestCase):
	def test_zero_mode(self):
		coeffs = ModeCoeffs("L", np.array([0.0]), 1.0)
		out = etd_update(np.array([2.0]), coeffs, np.array([3.0]), 0.1)
		self.assertAlmostEqual(float(out[0]), 2.3, places=15)

	def test_pure_decay(self):
		coeffs = ModeCoeffs("L", np.array([1.0]), 1.0)
		out = etd_update(np.array([1.0]), coeffs, np.array([0.0]), 1.0)
		self.assertAlmostEqual(float(out[0]), math.exp(-1.0), places=15)

	def test_form_equivalence(self):
		grid = GridSpec(2, 16, 2 * math.pi)
		plan = SpectralPlan(grid)
		rng = np.random.default_rng(5)
		uh = plan.forward(rng.standard_normal(grid.shape))
		nh = plan.forward(rng.standard_normal(grid.shape))
		for kind in ("L", "D"):
			coeffs = plan.coeffs(kind, 0.8, make_params())
			for tau in (1e-3, 0.1, 1.0):
				explicit = etd_update(uh, coeffs, nh, tau)
				implicit = quasi_implicit_update(uh, coeffs, nh, tau)
				err = np.max(np.abs(explicit - implicit)) / np.max(np.abs(explicit))
				self.assertLessEqual(err, 1e-11)

	def test_linearity(self):
		plan = SpectralPlan(GridSpec(2, 8, 1.0))
		coeffs = plan.coeffs("D", 1.0, make_params())
		rng = np.random.default_rng(6)
		a, b, n = (plan.forward(rng.standard_normal(plan.grid.shape)) for _ in range(3))
		np.testing.assert_allclose(
			etd_update(a + 2 * b, coeffs, 3 * n, 0.2),
			etd_update(a, coeffs, n, 0.2) + etd_update(2 * b, coeffs, 2 * n, 0.2),
			atol=1e-14,
		)


class TestWeightedNorm(unittest.TestCase):
	def setUp(self):
		self.grid = GridSpec(2, 16, 2 * math.pi)
		self.plan = SpectralPlan(self.grid)
		self.p = make_params()

	def test_small_tau_is_plain_norm(self):
		f = np.random.default_rng(7).standard_normal(self.grid.shape)
		coeffs = self.plan.coeffs("L", 1.0, self.p)
		value = weighted_norm(f, self.plan, coeffs, 1e-14, "Q")
		self.assertLessEqual(abs(value - inner(f, f, self.grid)) / inner(f, f, self.grid), 1e-12)

	def test_constant_field(self):
		coeffs = self.plan.coeffs("L", 0.5, self.p)
		c, tau = 0.3, 0.2
		value = weighted_norm(np.full(self.grid.shape, c), self.plan, coeffs, tau, "Q")
		expected = qfun(tau * 0.5 * self.p.kappa1) * c * c * self.grid.volume
		self.assertAlmostEqual(value, expected, places=12)

	def test_norm_chain(self):
		rng = np.random.default_rng(8)
		for trial in range(100):
			tau = 10 ** rng.uniform(-3, 0)
			g = rng.uniform(0.5, 2.0)
			kind = "L" if trial % 2 else "D"
			coeffs = self.plan.coeffs(kind, g, self.p)
			if trial % 4 == 1:
				f = QField(self.grid, rng.standard_normal((2,) + self.grid.shape))
				plain = frobenius_inner(f, f)
			else:
				f = rng.standard_normal(self.grid.shape)
				plain = inner(f, f, self.grid)
			tol = 1e-12 * plain
			nq = weighted_norm(f, self.plan, coeffs, tau, "Q")
			nq1 = weighted_norm(f, self.plan, coeffs, tau, "Q1")
			nop = weighted_norm(f, self.plan, coeffs, tau, "op")
			self.assertLessEqual(nq, plain + tol)
			self.assertLessEqual(plain, nq1 + tol)
			self.assertLessEqual(nq1, nop + tol)
