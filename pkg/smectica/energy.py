# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""
Model parameters, the discrete nonlinear energy E1h and its exact gradients.

E1h(Q, u) = 2 B0 q^2 <D^2 u, M u> + B0 q^4 ||M u||^2 + sum(f_bn) h^d + sum(f_s) h^d

with M = Q/s_plus + I/d. The two gradients returned by :func:`variations` are the exact
derivatives of this sum under the grid inner products, which is what makes the
auxiliary-variable update consistent with the true energy.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from smectica import grid as fd
from smectica import qtensor
from smectica.exceptions import InternalError, NumericalBlowup, ParameterError
from smectica.qtensor import QField
from smectica.utils import throw

logger = logging.getLogger(__name__)

BISECTION_TOL = 1e-10


def s_plus(A: float, B: float, C: float, d: int) -> float:
	"""Equilibrium uniaxial order parameter for the bulk potential."""
	if not C > 0:
		throw(f"C > 0 required, got C={C}", ParameterError)
	if d == 2:
		if not A < 0:
			throw(f"A < 0 required for d=2, got A={A}", ParameterError)
		return math.sqrt(-2.0 * A / C)
	if d == 3:
		if not A < B * B / (27.0 * C):
			throw(f"A < B^2/(27C) required for d=3, got A={A}, B={B}, C={C}", ParameterError)
		return (B + math.sqrt(B * B - 24.0 * A * C)) / (4.0 * C)
	throw(f"dimension must be 2 or 3, got {d}", ParameterError)


@dataclass(frozen=True)
class ModelParams:
	d: int
	K: float
	A: float
	C: float
	a: float
	b: float
	c: float
	q: float
	B0: float
	kappa1: float
	kappa2: float
	B: float = 0.0
	eta0: float = 0.95
	s_plus: float = field(init=False)

	def __post_init__(self):
		for name in ("K", "C", "c", "B0"):
			if not getattr(self, name) > 0:
				throw(f"{name} > 0 required, got {name}={getattr(self, name)}", ParameterError)
		if self.d == 3 and not self.B > 0:
			throw(f"B > 0 required for d=3, got B={self.B}", ParameterError)
		if not self.q >= 0:
			throw(f"q >= 0 required, got q={self.q}", ParameterError)
		for name in ("kappa1", "kappa2"):
			if not getattr(self, name) >= 0:
				throw(f"{name} >= 0 required, got {name}={getattr(self, name)}", ParameterError)
		if not 0.0 <= self.eta0 <= 1.0:
			throw(f"eta0 must lie in [0, 1], got eta0={self.eta0}", ParameterError)
		for name in ("K", "A", "B", "C", "a", "b", "c", "q", "B0", "kappa1", "kappa2", "eta0"):
			if not math.isfinite(getattr(self, name)):
				throw(f"{name} must be finite", ParameterError)
		object.__setattr__(self, "s_plus", s_plus(self.A, self.B, self.C, self.d))

	@classmethod
	def from_temperatures(cls, T=-1.0, T1=0.0, T2=4.0, **kwargs) -> "ModelParams":
		"""Build A = T - T1 and a = T - T2 from the rescaled temperatures."""
		return cls(A=T - T1, a=T - T2, **kwargs)

	@property
	def b_d(self) -> float:
		"""Cubic coefficient of the pointwise bound polynomial (zero without a cubic bulk term)."""
		return 0.0 if self.d == 2 else abs(self.B) / math.sqrt(6.0)

	def as_dict(self) -> dict:
		return {
			"d": self.d,
			"K": self.K,
			"A": self.A,
			"B": self.B,
			"C": self.C,
			"a": self.a,
			"b": self.b,
			"c": self.c,
			"q": self.q,
			"B0": self.B0,
			"kappa1": self.kappa1,
			"kappa2": self.kappa2,
			"eta0": self.eta0,
		}


def _check_pair(Q: QField, u, p: ModelParams):
	if Q.d != p.d:
		throw(f"field dimension {Q.d} does not match parameter dimension {p.d}", ParameterError)
	return Q.grid.check(u, "u")


def f_bn_density(Q: QField, p: ModelParams) -> np.ndarray:
	t = qtensor.trQ2(Q)
	out = 0.5 * p.A * t + 0.25 * p.C * t * t
	if Q.d == 3:
		out = out - p.B / 3.0 * qtensor.trQ3(Q)
	return out


def f_s_density(u, p: ModelParams) -> np.ndarray:
	u = np.asarray(u)
	u2 = u * u
	return 0.5 * p.a * u2 + p.b / 3.0 * u2 * u + 0.25 * p.c * u2 * u2


def _coupling(Q: QField, u, p: ModelParams):
	M = qtensor.m_tensor(Q, p.s_plus)
	D2u = fd.hessian(u, Q.grid)
	return M, D2u, M * u


def e1h(Q: QField, u, p: ModelParams) -> float:
	u = _check_pair(Q, u, p)
	grid = Q.grid
	bulk = float(np.sum(f_bn_density(Q, p) + f_s_density(u, p)) * grid.cell_volume)
	if p.q == 0:
		return bulk
	_, D2u, Mu = _coupling(Q, u, p)
	q2 = p.q * p.q
	cross = 2.0 * p.B0 * q2 * fd.inner(D2u, Mu, grid)
	return cross + p.B0 * q2 * q2 * fd.inner(Mu, Mu, grid) + bulk


def variations(Q: QField, u, p: ModelParams) -> tuple[QField, np.ndarray]:
	"""Gradients (H, mu) of E1h with respect to Q and u."""
	u = _check_pair(Q, u, p)
	grid = Q.grid
	t = qtensor.trQ2(Q)
	u2 = u * u
	H = Q * (p.A + p.C * t)
	mu = p.a * u + p.b * u2 + p.c * u2 * u

	projected = np.zeros((p.d, p.d) + grid.shape)
	if p.d == 3:
		projected -= p.B * qtensor.dev(qtensor.Qsquared(Q))
	if p.q != 0:
		M, D2u, Mu = _coupling(Q, u, p)
		q2 = p.q * p.q
		projected += 2.0 * p.B0 * q2 / p.s_plus * qtensor.dev(u * D2u)
		H = H + Q * (2.0 * p.B0 * q2 * q2 / p.s_plus**2 * u2)
		MD2u = np.sum(M * D2u, axis=(0, 1))
		mu = mu + 2.0 * p.B0 * q2 * (MD2u + fd.hessian_adjoint(Mu, grid))
		mu = mu + 2.0 * p.B0 * q2 * q2 * np.sum(M * M, axis=(0, 1)) * u
	return H + qtensor.pack(projected, grid), mu


def grad_q(Q: QField, u, p: ModelParams) -> QField:
	return variations(Q, u, p)[0]


def grad_u(Q: QField, u, p: ModelParams) -> np.ndarray:
	return variations(Q, u, p)[1]


def g_factor(s: float, e1: float) -> float:
	try:
		g = math.exp(s - e1)
	except OverflowError:
		g = math.inf
	if not math.isfinite(g):
		throw(
			f"relaxation factor overflowed (s - E1h = {s - e1:.6g})", NumericalBlowup, magnitude=abs(s - e1)
		)
	return g


@dataclass(frozen=True, eq=False)
class StabilizedTerms:
	"""Explicit parts g (kappa1 Q - H) and g (kappa2 u - mu) plus the raw gradients they came from."""

	Nq: QField
	Nu: np.ndarray
	g: float
	H: QField
	mu: np.ndarray


def stabilized_nonlinear(Q: QField, u, s: float, p: ModelParams, e1: float | None = None) -> StabilizedTerms:
	"""Pass ``e1`` when E1h(Q, u) is already known; ``s == e1`` gives g = 1 exactly."""
	g = g_factor(s, e1h(Q, u, p) if e1 is None else e1)
	H, mu = variations(Q, u, p)
	return StabilizedTerms((Q * p.kappa1 - H) * g, g * (p.kappa2 * u - mu), g, H, mu)


def quadratic_energy(Q: QField, u, p: ModelParams) -> float:
	u = _check_pair(Q, u, p)
	grid = Q.grid
	lap = fd.laplacian(u, grid)
	return 0.5 * p.K * fd.grad_norm_sq(qtensor.to_full(Q), grid) + p.B0 * fd.inner(lap, lap, grid)


def original_energy(Q: QField, u, p: ModelParams) -> float:
	return quadratic_energy(Q, u, p) + e1h(Q, u, p)


def modified_energy(Q: QField, u, s: float, p: ModelParams) -> float:
	return quadratic_energy(Q, u, p) + s


def coupling_source_sup(Q: QField, u, p: ModelParams) -> float:
	"""sup_F of (2 B0 q^2/s_plus) dev(u D^2 u), the forcing term in the pointwise bound."""
	u = _check_pair(Q, u, p)
	if p.q == 0:
		return 0.0
	D2u = fd.hessian(u, Q.grid)
	return 2.0 * p.B0 * p.q**2 / p.s_plus * qtensor.sup_frobenius(qtensor.dev(u * D2u))


def bound_polynomial(p: ModelParams, S: float):
	A, b, C = p.A, p.b_d, p.C
	return lambda xi: -A * xi + b * xi * xi - C * xi**3 + S


def _bisect(f, lo, hi):
	# f(lo) > 0 >= f(hi)
	for _ in range(200):
		if hi - lo <= BISECTION_TOL:
			break
		mid = 0.5 * (lo + hi)
		if f(mid) > 0:
			lo = mid
		else:
			hi = mid
	return hi


def mbp_eta(p: ModelParams, sup_Q0: float, S: float) -> float:
	"""Maximum bound eta = max(sup_Q0, xi*), xi* the smallest point past which the bound
	polynomial stays non-positive.

	The polynomial is split into monotone pieces at its positive critical points and scanned
	from the right, so the last sign change is found by plain bisection.
	"""
	if sup_Q0 < 0 or S < 0:
		throw(f"sup_Q0 and S must be non-negative, got {sup_Q0}, {S}", ParameterError)
	f = bound_polynomial(p, S)
	A, b, C = p.A, p.b_d, p.C

	upper = 1.0 + max(abs(A), b, S) / C
	for _ in range(200):
		if f(upper) < 0:
			break
		upper *= 2.0
	else:
		throw("bound polynomial has no positive root", InternalError)

	# f'(xi) = -A + 2 b xi - 3 C xi^2
	crit = [r.real for r in np.roots([-3.0 * C, 2.0 * b, -A]) if abs(r.imag) < 1e-14 and 0 < r.real < upper]
	knots = [0.0] + sorted(crit) + [upper]

	xi_star = 0.0
	for lo, hi in zip(reversed(knots[:-1]), reversed(knots[1:]), strict=True):
		if f(lo) > 0:
			xi_star = _bisect(f, lo, hi)
			break
	eta = max(sup_Q0, xi_star)
	logger.debug("mbp bound: xi*=%.12g eta=%.12g (S=%.6g)", xi_star, eta, S)
	return eta


def kappa0(p: ModelParams, eta: float, sup_u2: float) -> float:
	A, b, C = p.A, p.b_d, p.C
	coupled = A + 2.0 * p.B0 * p.q**4 * sup_u2 / p.s_plus**2 + C * eta * eta

	def slope(xi):
		return A - 2.0 * b * xi + 3.0 * C * xi * xi

	# convex in xi, so the interval maximum sits at an endpoint
	return max(coupled, slope(0.0), slope(eta))
