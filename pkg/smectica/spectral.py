# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""
DFT diagonalisation of the constant-coefficient difference operators.

The periodic Laplacian is circulant, so the real DFT diagonalises it exactly with symbol
``lambda(k) = (4/h^2) sum_i sin^2(pi k_i / J)``. Everything the stepper needs from the stiff
linear part (decay factors, the phi_1 weight, the Q and Q1 weighted norms) is a per-mode
scalar function of ``tau * sigma(k)``.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from smectica.exceptions import ArgumentError
from smectica.grid import GridSpec
from smectica.qtensor import QField, to_full
from smectica.utils import throw

logger = logging.getLogger(__name__)

OPERATOR_KINDS = ("L", "D")
NORM_KINDS = ("Q", "Q1", "op")
SERIES_CUTOFF = 1e-4


def _as_array(z):
	return np.asarray(z, dtype=float)


def _unwrap(z, out):
	return float(out) if np.ndim(z) == 0 else out


def phi1(z):
	"""(e^z - 1)/z for z <= 0, with the removable singularity filled in."""
	z = _as_array(z)
	safe = np.where(z == 0.0, 1.0, z)
	out = np.where(z == 0.0, 1.0, np.expm1(safe) / safe)
	return _unwrap(z, out)


def qfun(z):
	"""z/(e^z - 1) for z >= 0; series below SERIES_CUTOFF, -z e^{-z}/expm1(-z) above 1."""
	z = _as_array(z)
	series = z < SERIES_CUTOFF
	tiny = np.where(series, z, 0.0)
	small = np.where(series | (z > 1.0), 1.0, z)
	large = np.where(z > 1.0, z, 1.0)
	with np.errstate(under="ignore"):
		out = np.where(
			series,
			1.0 - 0.5 * tiny + tiny * tiny / 12.0 - tiny**4 / 720.0,
			np.where(z > 1.0, -large * np.exp(-large) / np.expm1(-large), small / np.expm1(small)),
		)
	return _unwrap(z, out)


def q1fun(z):
	"""qfun(z) + z/2, which is >= 1; the series drops the z/2 cancellation near zero."""
	z = _as_array(z)
	tiny = np.where(z < SERIES_CUTOFF, z, 0.0)
	series = 1.0 + tiny * tiny / 12.0 - tiny**4 / 720.0
	out = np.where(z < SERIES_CUTOFF, series, _as_array(qfun(z)) + 0.5 * z)
	return _unwrap(z, out)


@dataclass(frozen=True, eq=False)
class ModeCoeffs:
	"""Per-mode symbol sigma(k) of one stabilised linear operator at a fixed relaxation factor."""

	kind: str
	sigma: np.ndarray
	g: float

	def decay(self, tau: float) -> np.ndarray:
		return np.exp(-tau * self.sigma)

	def phi_weight(self, tau: float) -> np.ndarray:
		"""tau * phi1(-tau sigma), written as -expm1(-tau sigma)/sigma."""
		sigma = self.sigma
		safe = np.where(sigma == 0.0, 1.0, sigma)
		return np.where(sigma == 0.0, tau, -np.expm1(-tau * safe) / safe)

	def weight(self, tau: float, kind: str) -> np.ndarray:
		if kind == "Q":
			return qfun(tau * self.sigma)
		if kind == "Q1":
			return q1fun(tau * self.sigma)
		if kind == "op":
			return self.sigma
		throw(f"norm kind must be one of {NORM_KINDS}, got {kind!r}", ArgumentError)


class SpectralPlan:
	"""Eigenvalues of -Delta_h on the real-DFT half spectrum plus forward/inverse transforms.

	The forward transform is normalised by 1/J^d, so ``||v||^2 = L^d sum_k |v_hat(k)|^2`` with
	the half-spectrum multiplicities applied.
	"""

	def __init__(self, grid: GridSpec):
		self.grid = grid
		d, J, h = grid.d, grid.J, grid.h
		full = (4.0 / h**2) * np.sin(np.pi * np.arange(J) / J) ** 2
		half = full[: J // 2 + 1]
		axes = [full] * (d - 1) + [half]
		mesh = np.meshgrid(*axes, indexing="ij")
		self.lambda_lap = sum(mesh)
		self.axes = tuple(range(-d, 0))
		self.spectral_shape = self.lambda_lap.shape
		self._scale = float(J**d)

	@cached_property
	def multiplicity(self) -> np.ndarray:
		J = self.grid.J
		m = np.full(J // 2 + 1, 2.0)
		m[0] = 1.0
		if J % 2 == 0:
			m[-1] = 1.0
		return np.broadcast_to(m, self.spectral_shape)

	def forward(self, f) -> np.ndarray:
		f = self.grid.check(f)
		return np.fft.rfftn(f, axes=self.axes) / self._scale

	def inverse(self, fh) -> np.ndarray:
		fh = np.asarray(fh)
		if fh.shape[-self.grid.d :] != self.spectral_shape:
			throw(f"spectral array shape {fh.shape} does not match plan {self.spectral_shape}", ArgumentError)
		return np.fft.irfftn(fh * self._scale, s=self.grid.shape, axes=self.axes)

	def coeffs(self, kind: str, g: float, params) -> ModeCoeffs:
		"""Symbol K lambda + g kappa1 (kind "L") or 2 B0 lambda^2 + g kappa2 (kind "D")."""
		lam = self.lambda_lap
		if kind == "L":
			sigma = params.K * lam + g * params.kappa1
		elif kind == "D":
			sigma = 2.0 * params.B0 * lam * lam + g * params.kappa2
		else:
			throw(f"operator kind must be one of {OPERATOR_KINDS}, got {kind!r}", ArgumentError)
		return ModeCoeffs(kind, sigma, g)

	def spectral_sum(self, fh, weight=None) -> float:
		"""L^d sum_k w(k) |f_hat(k)|^2 over every leading component."""
		power = np.abs(fh) ** 2
		if weight is not None:
			power = power * weight
		return float(np.sum(power * self.multiplicity) * self.grid.volume)


def etd_update(field_hat, coeffs: ModeCoeffs, nonlin_hat, tau: float) -> np.ndarray:
	return coeffs.decay(tau) * field_hat + coeffs.phi_weight(tau) * nonlin_hat


def quasi_implicit_update(field_hat, coeffs: ModeCoeffs, nonlin_hat, tau: float) -> np.ndarray:
	"""Per-mode solve of (Q(tau sigma)/tau)(v - u) + sigma v = N."""
	w = qfun(tau * coeffs.sigma) / tau
	return (nonlin_hat + w * field_hat) / (w + coeffs.sigma)


def weighted_norm(field, plan: SpectralPlan, coeffs: ModeCoeffs, tau: float, kind: str = "Q") -> float:
	"""Squared weighted norm of a scalar field or a QField (Frobenius sum over matrix entries)."""
	values = to_full(field) if isinstance(field, QField) else field
	return plan.spectral_sum(plan.forward(values), coeffs.weight(tau, kind))


def parseval_check(field, plan: SpectralPlan) -> float:
	values = to_full(field) if isinstance(field, QField) else plan.grid.check(field)
	direct = float(np.sum(values * values) * plan.grid.cell_volume)
	spectral = plan.spectral_sum(plan.forward(values))
	return abs(direct - spectral) / max(abs(direct), np.finfo(float).tiny)
