# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""Initial data for Q and u. Random fields depend only on (seed, grid, amplitude)."""

import math

import numpy as np

from smectica.exceptions import ConfigError
from smectica.grid import GridSpec
from smectica.qtensor import QField, n_components, uniaxial
from smectica.utils import throw


def rng_for(seed: int) -> np.random.Generator:
	return np.random.default_rng(seed)


def director_q(grid: GridSpec, s: float = 1.0) -> QField:
	"""Q = s (n n^T - I/d) with n = (cos(x+y), sin(x+y)[, 0])."""
	x, y = grid.coordinates[:2]
	n = [np.cos(x + y), np.sin(x + y)]
	if grid.d == 3:
		n.append(np.zeros(grid.shape))
	return uniaxial(np.stack(n), s, grid)


def random_q(grid: GridSpec, amplitude: float, rng: np.random.Generator) -> QField:
	"""Independent uniform samples in [-amplitude, amplitude] per compact component."""
	return QField(grid, rng.uniform(-amplitude, amplitude, (n_components(grid.d),) + grid.shape))


def random_u(grid: GridSpec, amplitude: float, rng: np.random.Generator) -> np.ndarray:
	return rng.uniform(-amplitude, amplitude, grid.shape)


def layer_u(grid: GridSpec, q: float, amplitude: float, kind: str = "layers") -> np.ndarray:
	"""Cosine layer profiles with wave number q per domain length.

	``layers``: amplitude cos(2 pi q x/L); ``target``: the sum of that over the first two axes;
	``separable``: the product over every axis.
	"""
	waves = [np.cos(2.0 * math.pi * q * x / grid.L) for x in grid.coordinates]
	if kind == "layers":
		return amplitude * waves[0]
	if kind == "target":
		return amplitude * (waves[0] + waves[1])
	if kind == "separable":
		return amplitude * np.prod(waves, axis=0)
	throw(f"unknown layer profile {kind!r}", ConfigError)


def build_initial(cfg) -> tuple[QField, np.ndarray]:
	"""Initial (Q, u) for a RunConfig. Q is drawn before u from one generator."""
	grid = cfg.grid()
	rng = rng_for(cfg.seed)

	if cfg.initial_q == "zero":
		Q = QField.zeros(grid)
	elif cfg.initial_q == "random":
		Q = random_q(grid, cfg.q_amplitude, rng)
	else:
		Q = director_q(grid)

	if cfg.initial_u == "zero":
		u = grid.zeros()
	elif cfg.initial_u == "random":
		u = random_u(grid, cfg.u_amplitude, rng)
	else:
		u = layer_u(grid, cfg.q, cfg.u_amplitude, cfg.initial_u)
	return Q, u
