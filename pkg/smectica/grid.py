# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""
Periodic uniform collocated grid and its finite-difference calculus.

Fields are plain ``numpy`` arrays whose trailing ``d`` axes are the grid axes, indexed
``[p, q(, r)]`` with ``x_p = p*h``. Leading axes (components of vector, matrix or Q-tensor
fields) are carried through every operator untouched, so the same stencil code serves
scalar and stacked fields. Periodic wrap is done with index arithmetic (``np.roll``); no
ghost storage is kept.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from smectica.exceptions import ArgumentError
from smectica.utils import throw

DIFF_KINDS = ("forward", "backward", "central")


@dataclass(frozen=True)
class GridSpec:
	d: int
	J: int
	L: float

	def __post_init__(self):
		if self.d not in (2, 3):
			throw(f"grid dimension must be 2 or 3, got {self.d}", ArgumentError)
		if int(self.J) != self.J or self.J < 4:
			throw(f"points per axis J must be an integer >= 4, got {self.J}", ArgumentError)
		if not (math.isfinite(self.L) and self.L > 0):
			throw(f"domain length L must be positive, got {self.L}", ArgumentError)

	@property
	def h(self) -> float:
		return self.L / self.J

	@property
	def shape(self) -> tuple:
		return (self.J,) * self.d

	@property
	def cell_volume(self) -> float:
		return self.h**self.d

	@property
	def volume(self) -> float:
		return self.L**self.d

	@cached_property
	def coordinates(self) -> tuple:
		"""Sampled coordinates, one array per axis, ``ij`` indexed."""
		x = np.arange(self.J) * self.h
		return tuple(np.meshgrid(*([x] * self.d), indexing="ij"))

	def zeros(self, *leading) -> np.ndarray:
		return np.zeros(tuple(leading) + self.shape)

	def check(self, f: np.ndarray, name="field") -> np.ndarray:
		f = np.asarray(f)
		if f.ndim < self.d or f.shape[-self.d :] != self.shape:
			throw(f"{name} of shape {f.shape} does not live on grid {self.shape}", ArgumentError)
		return f


def _np_axis(f, grid, axis):
	if not 1 <= axis <= grid.d:
		throw(f"axis must be in 1..{grid.d}, got {axis}", ArgumentError)
	return f.ndim - grid.d + axis - 1


def apply_diff(f, grid: GridSpec, axis: int, kind: str = "forward") -> np.ndarray:
	f = grid.check(f)
	ax = _np_axis(f, grid, axis)
	if kind == "forward":
		return (np.roll(f, -1, axis=ax) - f) / grid.h
	if kind == "backward":
		return (f - np.roll(f, 1, axis=ax)) / grid.h
	if kind == "central":
		return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * grid.h)
	throw(f"difference kind must be one of {DIFF_KINDS}, got {kind!r}", ArgumentError)


def second_diff(f, grid: GridSpec, axis: int) -> np.ndarray:
	"""D_k^+ D_k^- f, the compact three-point second difference."""
	f = grid.check(f)
	ax = _np_axis(f, grid, axis)
	return (np.roll(f, -1, axis=ax) - 2.0 * f + np.roll(f, 1, axis=ax)) / grid.h**2


def gradient(f, grid: GridSpec) -> np.ndarray:
	"""Forward-difference gradient; the component axis is prepended."""
	return np.stack([apply_diff(f, grid, k, "forward") for k in range(1, grid.d + 1)])


def divergence(v, grid: GridSpec) -> np.ndarray:
	"""Backward-difference divergence of a field whose leading axis holds the d components."""
	v = grid.check(v, "vector field")
	if v.ndim < grid.d + 1 or v.shape[0] != grid.d:
		throw(f"vector field needs {grid.d} leading components, got shape {v.shape}", ArgumentError)
	return sum(apply_diff(v[k - 1], grid, k, "backward") for k in range(1, grid.d + 1))


def laplacian(f, grid: GridSpec) -> np.ndarray:
	return sum(second_diff(f, grid, k) for k in range(1, grid.d + 1))


def biharmonic(f, grid: GridSpec) -> np.ndarray:
	return laplacian(laplacian(f, grid), grid)


def mixed_diff(f, grid: GridSpec, k: int, l: int) -> np.ndarray:
	"""Component (k, l) of the discrete Hessian operator.

	Diagonal entries use D_k^+ D_k^- so that the trace is exactly the Laplacian; off-diagonal
	entries use D_k^c D_l^c. Every component is self-adjoint under the grid inner product.
	"""
	if k == l:
		return second_diff(f, grid, k)
	return apply_diff(apply_diff(f, grid, l, "central"), grid, k, "central")


def hessian(f, grid: GridSpec) -> np.ndarray:
	"""Discrete Hessian as a full symmetric ``(d, d, *shape)`` matrix field."""
	f = grid.check(f)
	out = np.empty((grid.d, grid.d) + f.shape)
	for k in range(grid.d):
		for l in range(k, grid.d):
			out[k, l] = mixed_diff(f, grid, k + 1, l + 1)
			if l != k:
				out[l, k] = out[k, l]
	return out


def hessian_adjoint(T, grid: GridSpec) -> np.ndarray:
	"""Sum over (k, l) of the Hessian component operators applied to T[k, l].

	This is the adjoint of :func:`hessian` under the Frobenius grid inner product and is the
	discrete double divergence used by the smectic chemical potential.
	"""
	T = grid.check(T, "matrix field")
	if T.shape[:2] != (grid.d, grid.d):
		throw(f"matrix field needs leading shape ({grid.d}, {grid.d}), got {T.shape}", ArgumentError)
	out = np.zeros(T.shape[2:])
	for k in range(grid.d):
		out += second_diff(T[k, k], grid, k + 1)
		for l in range(k + 1, grid.d):
			out += mixed_diff(T[k, l] + T[l, k], grid, k + 1, l + 1)
	return out


def inner(f, g, grid: GridSpec) -> float:
	"""h^d times the sum over every periodic point (and every leading component)."""
	f = grid.check(f)
	g = grid.check(g)
	if f.shape != g.shape:
		throw(f"inner product of mismatched shapes {f.shape} and {g.shape}", ArgumentError)
	return float(np.sum(f * g) * grid.cell_volume)


def l2_norm(f, grid: GridSpec) -> float:
	return math.sqrt(max(inner(f, f, grid), 0.0))


def grad_norm_sq(f, grid: GridSpec) -> float:
	g = gradient(f, grid)
	return inner(g, g, grid)


def h1_norm(f, grid: GridSpec) -> float:
	return math.sqrt(l2_norm(f, grid) ** 2 + grad_norm_sq(f, grid))


def h2_norm(f, grid: GridSpec) -> float:
	lap = laplacian(f, grid)
	return math.sqrt(h1_norm(f, grid) ** 2 + inner(lap, lap, grid))


def inf_norm(f, grid: GridSpec) -> float:
	f = grid.check(f)
	return float(np.max(np.abs(f)))


def shift(f, grid: GridSpec, offsets) -> np.ndarray:
	"""Cyclic shift of the grid indices by ``offsets`` (one integer per axis)."""
	f = grid.check(f)
	axes = tuple(range(f.ndim - grid.d, f.ndim))
	return np.roll(f, tuple(offsets), axis=axes)
