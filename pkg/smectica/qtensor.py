# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""
Symmetric traceless tensor fields.

A :class:`QField` stores only the independent components of Q, ``(q11, q12)`` in 2D and
``(q11, q22, q12, q13, q23)`` in 3D, stacked on a leading axis. The remaining entries are
reconstructed (``q22 = -q11`` in 2D, ``q33 = -q11 - q22`` in 3D), so symmetry and zero trace
hold by construction and every componentwise linear update stays inside the space.

Full matrix fields (``SymMatrixField``) are ``(d, d, *grid.shape)`` arrays and only appear
where a pointwise matrix product is needed.
"""

import math
from dataclasses import dataclass

import numpy as np

from smectica import grid as fd
from smectica.exceptions import ArgumentError, ConstraintError, ParameterError
from smectica.grid import GridSpec
from smectica.utils import throw

TRACE_TOL = 1e-10

# (row, col) of each compact component
COMPONENTS = {
	2: ((0, 0), (0, 1)),
	3: ((0, 0), (1, 1), (0, 1), (0, 2), (1, 2)),
}

COMPONENT_NAMES = {
	2: ("q11", "q12"),
	3: ("q11", "q22", "q12", "q13", "q23"),
}


def n_components(d: int) -> int:
	return len(COMPONENTS[d])


@dataclass(eq=False)
class QField:
	grid: GridSpec
	comps: np.ndarray

	def __post_init__(self):
		self.comps = np.asarray(self.comps, dtype=float)
		expected = (n_components(self.grid.d),) + self.grid.shape
		if self.comps.shape != expected:
			throw(f"QField components have shape {self.comps.shape}, expected {expected}", ArgumentError)

	@classmethod
	def zeros(cls, grid: GridSpec) -> "QField":
		return cls(grid, np.zeros((n_components(grid.d),) + grid.shape))

	@property
	def d(self) -> int:
		return self.grid.d

	def copy(self) -> "QField":
		return QField(self.grid, self.comps.copy())

	def with_comps(self, comps) -> "QField":
		return QField(self.grid, comps)

	def _other(self, other):
		if isinstance(other, QField):
			if other.grid != self.grid:
				throw("QFields live on different grids", ArgumentError)
			return other.comps
		return other

	def __add__(self, other):
		return self.with_comps(self.comps + self._other(other))

	def __sub__(self, other):
		return self.with_comps(self.comps - self._other(other))

	def __mul__(self, other):
		# scalars and ScalarFields (broadcast over the component axis)
		return self.with_comps(self.comps * np.asarray(self._other(other)))

	__rmul__ = __mul__

	def __truediv__(self, other):
		return self.with_comps(self.comps / np.asarray(self._other(other)))

	def __neg__(self):
		return self.with_comps(-self.comps)


def to_full(Q: QField) -> np.ndarray:
	d = Q.d
	M = np.empty((d, d) + Q.grid.shape)
	if d == 2:
		q11, q12 = Q.comps
		M[0, 0], M[1, 1] = q11, -q11
		M[0, 1] = M[1, 0] = q12
	else:
		q11, q22, q12, q13, q23 = Q.comps
		M[0, 0], M[1, 1], M[2, 2] = q11, q22, -q11 - q22
		M[0, 1] = M[1, 0] = q12
		M[0, 2] = M[2, 0] = q13
		M[1, 2] = M[2, 1] = q23
	return M


def _check_full(M, grid):
	M = grid.check(M, "matrix field")
	if M.shape[:2] != (grid.d, grid.d):
		throw(f"matrix field needs leading shape ({grid.d}, {grid.d}), got {M.shape}", ArgumentError)
	return M


def pointwise_norm(M: np.ndarray) -> np.ndarray:
	"""|M|_F at every point of a full matrix field."""
	return np.sqrt(np.sum(M * M, axis=(0, 1)))


def trace(M: np.ndarray) -> np.ndarray:
	return sum(M[i, i] for i in range(M.shape[0]))


def from_full(M: np.ndarray, grid: GridSpec) -> QField:
	"""Pack a symmetric, numerically traceless matrix field.

	A trace up to 1e-10 relative to the pointwise Frobenius norm is projected away; anything
	larger raises ConstraintError.
	"""
	M = _check_full(M, grid)
	d = grid.d
	scale = pointwise_norm(M)
	tr = trace(M)
	if np.any(np.abs(tr) > TRACE_TOL * scale):
		throw(f"matrix field is not traceless (max |tr| = {np.max(np.abs(tr)):.3e})", ConstraintError)
	asym = np.abs(M - M.swapaxes(0, 1))
	if np.any(asym > TRACE_TOL * scale):
		throw(f"matrix field is not symmetric (max asymmetry = {np.max(asym):.3e})", ConstraintError)
	if np.any(tr != 0):
		M = dev(M)
	return pack(M, grid)


def pack(M: np.ndarray, grid: GridSpec) -> QField:
	"""Take the independent entries of a matrix field that is traceless by construction."""
	return QField(grid, np.stack([M[i, j] for i, j in COMPONENTS[grid.d]]))


def dev(M: np.ndarray, d: int | None = None) -> np.ndarray:
	"""Traceless part M - tr(M)/d I."""
	d = d or M.shape[0]
	out = np.array(M, dtype=float, copy=True)
	shift = trace(M) / d
	for i in range(d):
		out[i, i] -= shift
	return out


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
	return np.einsum("ik...,kj...->ij...", A, B)


def identity(grid: GridSpec) -> np.ndarray:
	eye = np.zeros((grid.d, grid.d) + grid.shape)
	for i in range(grid.d):
		eye[i, i] = 1.0
	return eye


def trQ2(Q: QField) -> np.ndarray:
	if Q.d == 2:
		q11, q12 = Q.comps
		return 2.0 * (q11 * q11 + q12 * q12)
	q11, q22, q12, q13, q23 = Q.comps
	q33 = -q11 - q22
	return q11 * q11 + q22 * q22 + q33 * q33 + 2.0 * (q12 * q12 + q13 * q13 + q23 * q23)


def trQ3(Q: QField) -> np.ndarray:
	if Q.d != 3:
		throw("tr(Q^3) is only defined for d=3 fields", ArgumentError)
	M = to_full(Q)
	return np.einsum("ij...,jk...,ki...->...", M, M, M)


def Qsquared(Q: QField) -> np.ndarray:
	M = to_full(Q)
	return matmul(M, M)


def m_tensor(Q: QField, s_plus: float) -> np.ndarray:
	"""Coupling tensor M = Q/s_plus + I/d; trace one at every point."""
	if not s_plus > 0:
		throw(f"s_plus must be positive, got {s_plus}", ParameterError)
	return to_full(Q) / s_plus + identity(Q.grid) / Q.d


def frobenius_inner(A, B, grid: GridSpec | None = None) -> float:
	"""Global Frobenius inner product of two QFields or two full matrix fields."""
	if isinstance(A, QField) and isinstance(B, QField):
		if A.grid != B.grid:
			throw("QFields live on different grids", ArgumentError)
		a, b = A.comps, B.comps
		if A.d == 2:
			pointwise = 2.0 * (a[0] * b[0] + a[1] * b[1])
		else:
			pointwise = (
				2.0 * (a[0] * b[0] + a[1] * b[1])
				+ a[0] * b[1]
				+ a[1] * b[0]
				+ 2.0 * (a[2] * b[2] + a[3] * b[3] + a[4] * b[4])
			)
		return float(np.sum(pointwise) * A.grid.cell_volume)
	if isinstance(A, QField) or isinstance(B, QField):
		grid = (A if isinstance(A, QField) else B).grid
		A = to_full(A) if isinstance(A, QField) else A
		B = to_full(B) if isinstance(B, QField) else B
	if grid is None:
		throw("a grid is required for full matrix fields", ArgumentError)
	return fd.inner(_check_full(A, grid), _check_full(B, grid), grid)


def sup_frobenius(A) -> float:
	M = to_full(A) if isinstance(A, QField) else np.asarray(A)
	return float(np.max(pointwise_norm(M)))


def l2_norm(Q: QField) -> float:
	return math.sqrt(max(frobenius_inner(Q, Q), 0.0))


def h1_norm(Q: QField) -> float:
	return fd.h1_norm(to_full(Q), Q.grid)


def h2_norm(Q: QField) -> float:
	return fd.h2_norm(to_full(Q), Q.grid)


def largest_eigenvalue(Q: QField) -> np.ndarray:
	if Q.d == 2:
		q11, q12 = Q.comps
		return np.sqrt(q11 * q11 + q12 * q12)
	M = np.moveaxis(to_full(Q), (0, 1), (-2, -1))
	return np.linalg.eigvalsh(M)[..., -1]


def director_angle(Q: QField) -> np.ndarray:
	"""In-plane angle of the leading eigenvector of a 2D Q, in (-pi/2, pi/2]."""
	if Q.d != 2:
		throw("director angle is only defined for d=2 fields", ArgumentError)
	q11, q12 = Q.comps
	return 0.5 * np.arctan2(q12, q11)


def uniaxial(n: np.ndarray, s: float, grid: GridSpec) -> QField:
	"""Q = s (n n^T - I/d) for a unit director field n of shape (d, *grid.shape)."""
	n = grid.check(n, "director field")
	return pack(s * (np.einsum("i...,j...->ij...", n, n) - identity(grid) / grid.d), grid)
