# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""
Convergence studies and the bundled self-verification checks.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from smectica import grid as fd
from smectica import qtensor
from smectica.config import RunConfig
from smectica.energy import ModelParams, e1h, variations
from smectica.exceptions import ArgumentError
from smectica.grid import GridSpec
from smectica.initial import build_initial, random_q, random_u, rng_for
from smectica.qtensor import QField, frobenius_inner
from smectica.spectral import (
	SpectralPlan,
	etd_update,
	parseval_check,
	phi1,
	qfun,
	quasi_implicit_update,
	weighted_norm,
)
from smectica.stepper import Mode, Solver, StepConfig, TimeController, initial_state
from smectica.utils import throw

logger = logging.getLogger(__name__)

ERROR_COLUMNS = ("Q_inf", "Q_l2", "Q_h1", "u_inf", "u_l2", "u_h2", "s")


@dataclass
class RateTable:
	"""Errors per ladder point and the observed order between neighbours."""

	variable: str
	ladder: list
	errors: dict = field(default_factory=dict)

	def rates(self, column: str) -> list:
		errs = self.errors[column]
		out = []
		for k in range(len(errs) - 1):
			ratio = self.ladder[k] / self.ladder[k + 1]
			if errs[k] > 0 and errs[k + 1] > 0:
				out.append(math.log(errs[k] / errs[k + 1]) / math.log(ratio))
			else:
				out.append(math.nan)
		return out

	def fitted_rate(self, column: str) -> float:
		"""Least-squares slope of log error against log ladder value over the positive errors.

		The neighbour rates at the fine end are biased upwards when the reference is only a factor
		of two finer than the last ladder point; the fit over the whole ladder is much less so.
		"""
		points = [(x, e) for x, e in zip(self.ladder, self.errors[column], strict=True) if e > 0]
		if len(points) < 2:
			return math.nan
		x, e = np.log(np.array(points)).T
		return float(np.polyfit(x, e, 1)[0])

	def format(self) -> str:
		columns = list(self.errors)
		head = [self.variable.rjust(12)] + [f"{c:>11} {'rate':>6}" for c in columns]
		lines = ["  ".join(head)]
		rates = {c: self.rates(c) for c in columns}
		for k, value in enumerate(self.ladder):
			row = [f"{value:12.5g}"]
			for c in columns:
				rate = rates[c][k - 1] if k > 0 else None
				rate_text = "" if rate is None else f"{rate:6.2f}"
				row.append(f"{self.errors[c][k]:11.3e} {rate_text:>6}")
			lines.append("  ".join(row))
		fit = ["fit".rjust(12)] + [f"{'':11} {self.fitted_rate(c):6.2f}" for c in columns]
		lines.append("  ".join(fit))
		return "\n".join(lines)


def state_errors(Q, u, s, Q_ref, u_ref, s_ref) -> dict:
	grid = Q.grid
	dQ, du = Q - Q_ref, u - u_ref
	return {
		"Q_inf": qtensor.sup_frobenius(dQ),
		"Q_l2": qtensor.l2_norm(dQ),
		"Q_h1": qtensor.h1_norm(dQ),
		"u_inf": fd.inf_norm(du, grid),
		"u_l2": fd.l2_norm(du, grid),
		"u_h2": fd.h2_norm(du, grid),
		"s": abs(s - s_ref),
	}


def solve(cfg: RunConfig, tau: float, T_final: float):
	"""Final state of a fixed-step run of ``cfg``."""
	cfg = cfg.replace(controller="fixed", tau=tau, T_final=T_final)
	params = cfg.params()
	Q0, u0 = build_initial(cfg)
	solver = Solver(cfg.step_config(), cfg.grid())
	state = initial_state(Q0, u0, params)
	n_steps = round(T_final / tau)
	for _ in range(n_steps):
		state, _diag = solver.step(state, tau)
	return state


@dataclass
class ModeContrast:
	"""Run summaries of one fixed-step experiment integrated in several modes."""

	tau: float
	T_final: float
	summaries: dict = field(default_factory=dict)

	def increases(self, mode: Mode) -> int:
		return self.summaries[mode].energy_increases

	def format(self) -> str:
		lines = [
			f"tau={self.tau:.6g} T_final={self.T_final:.6g}",
			f"{'mode':>12}  {'steps':>6}  {'increases':>9}  {'max increase':>12}  "
			f"{'E_original':>25}  {'max |s-E1h|':>11}",
		]
		for mode, summary in self.summaries.items():
			energies = f"{summary.E_original_initial:.5g} -> {summary.E_original_final:.5g}"
			lines.append(
				f"{mode.value:>12}  {summary.steps:6d}  {summary.energy_increases:9d}  "
				f"{summary.max_energy_increase:12.3e}  {energies:>25}  {summary.max_sav_gap:11.3e}"
			)
		return "\n".join(lines)


def mode_contrast(
	cfg: RunConfig, tau: float, T_final: float | None = None, modes=(Mode.PLAIN, Mode.NO_RELAX, Mode.RELAXED)
) -> ModeContrast:
	"""Integrate ``cfg`` from the same initial data in each mode and count modified-energy increases."""
	T_final = cfg.T_final if T_final is None else T_final
	_check_divides(T_final, tau)
	base = cfg.replace(controller="fixed", tau=tau, T_final=T_final, assert_dissipation=False)
	Q0, u0 = build_initial(base)
	report = ModeContrast(tau, T_final)
	for mode in modes:
		mode_cfg = base.replace(mode=mode.value)
		logger.info("mode contrast: %s at tau=%.6g", mode.value, tau)
		solver = Solver(mode_cfg.step_config(), mode_cfg.grid())
		report.summaries[mode] = solver.run(initial_state(Q0, u0, mode_cfg.params()), T_final)
	return report


def _check_divides(T_final, tau):
	n = T_final / tau
	if abs(n - round(n)) > 1e-9 * max(n, 1.0) or round(n) < 1:
		throw(f"tau={tau} does not divide T_final={T_final}", ArgumentError)


def convergence_time(cfg: RunConfig, tau_ladder, tau_ref: float, T_final: float | None = None) -> RateTable:
	T_final = cfg.T_final if T_final is None else T_final
	tau_ladder = sorted(tau_ladder, reverse=True)
	if not tau_ladder:
		throw("tau ladder is empty", ArgumentError)
	if not tau_ref < min(tau_ladder):
		throw(f"reference tau {tau_ref} must be smaller than every ladder tau", ArgumentError)
	for tau in [*tau_ladder, tau_ref]:
		_check_divides(T_final, tau)

	logger.info("time convergence: reference run at tau=%.6g", tau_ref)
	ref = solve(cfg, tau_ref, T_final)
	table = RateTable("tau", tau_ladder, {c: [] for c in ERROR_COLUMNS})
	for tau in tau_ladder:
		logger.info("time convergence: ladder run at tau=%.6g", tau)
		state = solve(cfg, tau, T_final)
		errors = state_errors(state.Q, state.u, state.s, ref.Q, ref.u, ref.s)
		for c in ERROR_COLUMNS:
			table.errors[c].append(errors[c])
	return table


def restrict(values: np.ndarray, factor: int, d: int) -> np.ndarray:
	"""Subsample the trailing d grid axes by an integer factor."""
	index = (Ellipsis,) + (slice(None, None, factor),) * d
	return values[index]


def convergence_space(
	cfg: RunConfig, J_ladder, tau: float, J_ref: int | None = None, T_final: float | None = None
) -> RateTable:
	T_final = cfg.T_final if T_final is None else T_final
	J_ladder = sorted(J_ladder)
	J_ref = J_ref or J_ladder[-1]
	chain = sorted(set(J_ladder) | {J_ref})
	for coarse, fine in zip(chain[:-1], chain[1:], strict=True):
		if fine % coarse:
			throw(f"grid ladder is not nested: {coarse} does not divide {fine}", ArgumentError)
	if J_ref < J_ladder[-1]:
		throw(f"reference grid J={J_ref} is coarser than the ladder", ArgumentError)
	if cfg.initial_q == "random" or cfg.initial_u == "random":
		logger.warning("random initial data is resampled per grid; spatial rates will not be meaningful")
	_check_divides(T_final, tau)

	logger.info("space convergence: reference run at J=%d", J_ref)
	ref = solve(cfg.replace(J=J_ref), tau, T_final)
	d = cfg.d
	hs = [cfg.L / J for J in J_ladder]
	table = RateTable("h", hs, {c: [] for c in ERROR_COLUMNS})
	for J in J_ladder:
		logger.info("space convergence: ladder run at J=%d", J)
		state = solve(cfg.replace(J=J), tau, T_final)
		factor = J_ref // J
		Q_ref = QField(state.Q.grid, restrict(ref.Q.comps, factor, d))
		u_ref = restrict(ref.u, factor, d)
		errors = state_errors(state.Q, state.u, state.s, Q_ref, u_ref, ref.s)
		for c in ERROR_COLUMNS:
			table.errors[c].append(errors[c])
	return table


@dataclass
class CheckResult:
	name: str
	residual: float
	tolerance: float

	@property
	def passed(self) -> bool:
		return bool(self.residual <= self.tolerance)


@dataclass
class SelfCheckReport:
	seed: int
	results: list = field(default_factory=list)

	@property
	def passed(self) -> bool:
		return all(r.passed for r in self.results)

	def format(self) -> str:
		lines = [f"selfcheck seed={self.seed}"]
		for r in self.results:
			status = "PASS" if r.passed else "FAIL"
			lines.append(f"  {status}  {r.name:<28} residual={r.residual:.3e}  tol={r.tolerance:.1e}")
		lines.append("all checks passed" if self.passed else "some checks FAILED")
		return "\n".join(lines)


def check_params(d: int) -> ModelParams:
	values = dict(d=d, K=0.1, A=-1.0, C=2.0, a=-5.0, b=0.3, c=5.0, q=1.0, B0=0.1, kappa1=8.0, kappa2=8.0)
	if d == 3:
		values["B"] = 1.0
	return ModelParams(**values)


def random_fields(grid: GridSpec, rng, amplitude=0.3):
	return random_q(grid, amplitude, rng), random_u(grid, amplitude, rng)


def gradient_check(
	d: int = 2, J: int = 8, seed: int = 42, eps: float = 1e-5, perturb=None, trials: int = 3
) -> float:
	"""Largest relative mismatch between <grad E1h, delta> and a central difference of E1h.

	Directions are unit-normalised; the first trial uses the gradient itself. ``perturb`` is
	applied to (H, mu) before comparison and exists to exercise the failure path.
	"""
	grid = GridSpec(d, J, 2 * math.pi)
	params = check_params(d)
	rng = rng_for(seed)
	Q, u = random_fields(grid, rng)
	H, mu = variations(Q, u, params)
	if perturb is not None:
		H, mu = perturb(H, mu)
	scale = math.sqrt(frobenius_inner(H, H) + fd.inner(mu, mu, grid))

	worst = 0.0
	for trial in range(trials):
		if trial == 0:
			dQ, du = H.copy(), np.array(mu)
		else:
			dQ, du = random_fields(grid, rng, 1.0)
		norm = math.sqrt(frobenius_inner(dQ, dQ) + fd.inner(du, du, grid))
		dQ, du = dQ / norm, du / norm
		plus = e1h(Q + dQ * eps, u + eps * du, params)
		minus = e1h(Q - dQ * eps, u - eps * du, params)
		numeric = (plus - minus) / (2 * eps)
		analytic = frobenius_inner(H, dQ) + fd.inner(mu, du, grid)
		worst = max(worst, abs(numeric - analytic) / scale)
	logger.debug("gradient check d=%d J=%d: %.3e", d, J, worst)
	return worst


def _sbp_residual(rng) -> float:
	grid = GridSpec(2, 16, 1.0)
	f, g = rng.standard_normal(grid.shape), rng.standard_normal(grid.shape)
	v = rng.standard_normal((2,) + grid.shape)
	lap = fd.inner(fd.laplacian(f, grid), g, grid)
	lap += fd.inner(fd.gradient(f, grid), fd.gradient(g, grid), grid)
	div = fd.inner(fd.divergence(v, grid), f, grid) + fd.inner(v, fd.gradient(f, grid), grid)
	f_norm = fd.l2_norm(f, grid)
	return max(
		abs(lap) / (f_norm * fd.l2_norm(g, grid) / grid.h**2),
		abs(div) / (f_norm * fd.l2_norm(v, grid) / grid.h),
	)


def _hessian_residual(rng) -> float:
	worst = 0.0
	for d, J in ((2, 16), (3, 8)):
		grid = GridSpec(d, J, 1.0)
		f = rng.standard_normal(grid.shape)
		T = rng.standard_normal((d, d) + grid.shape)
		T = T + T.swapaxes(0, 1)
		lhs = fd.inner(fd.hessian(f, grid), T, grid)
		rhs = fd.inner(f, fd.hessian_adjoint(T, grid), grid)
		worst = max(worst, abs(lhs - rhs) / (fd.l2_norm(f, grid) * fd.l2_norm(T, grid) / grid.h**2))
	return worst


def _identity_residual() -> float:
	z = np.logspace(-12, 3, 200)
	return float(np.max(np.abs((qfun(z) + z) * phi1(-z) - 1.0)))


def _parseval_residual(rng) -> float:
	grid = GridSpec(2, 16, 2.0)
	return parseval_check(rng.standard_normal(grid.shape), SpectralPlan(grid))


def _norm_chain_violation(rng, n_fields=100) -> float:
	"""Largest relative violation of Q-norm <= l2 <= Q1-norm <= operator norm."""
	grid = GridSpec(2, 16, 2 * math.pi)
	plan = SpectralPlan(grid)
	params = check_params(2)
	worst = 0.0
	for k in range(n_fields):
		tau = 10 ** rng.uniform(-3, 0)
		coeffs = plan.coeffs("L" if k % 2 else "D", rng.uniform(0.5, 2.0), params)
		f = rng.standard_normal(grid.shape)
		plain = fd.inner(f, f, grid)
		chain = [weighted_norm(f, plan, coeffs, tau, "Q"), plain]
		chain += [weighted_norm(f, plan, coeffs, tau, "Q1"), weighted_norm(f, plan, coeffs, tau, "op")]
		for lo, hi in zip(chain[:-1], chain[1:], strict=True):
			worst = max(worst, (lo - hi) / plain)
	return max(worst, 0.0)


def _form_residual(rng) -> float:
	grid = GridSpec(2, 16, 2 * math.pi)
	plan = SpectralPlan(grid)
	params = check_params(2)
	worst = 0.0
	for kind in ("L", "D"):
		coeffs = plan.coeffs(kind, rng.uniform(0.5, 2.0), params)
		vh = plan.forward(rng.standard_normal(grid.shape))
		nh = plan.forward(rng.standard_normal(grid.shape))
		for tau in (1e-3, 1e-1, 1.0):
			a = etd_update(vh, coeffs, nh, tau)
			b = quasi_implicit_update(vh, coeffs, nh, tau)
			worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(a))))
	return worst


def _dissipation_residual(rng) -> float:
	"""Largest relative modified-energy increase over a few steps at several tau."""
	grid = GridSpec(2, 16, 2 * math.pi)
	params = check_params(2)
	Q0, u0 = random_fields(grid, rng, 0.3)
	worst = -math.inf
	for mode in (Mode.RELAXED, Mode.NO_RELAX):
		for tau in (1e-3, 1e-2, 1e-1, 1.0):
			cfg = StepConfig(params, TimeController.fixed(tau), mode, assert_dissipation=False)
			solver = Solver(cfg, grid)
			state = initial_state(Q0, u0, params)
			for _ in range(5):
				state, diag = solver.step(state, tau)
				E_prev = diag.E_modified - diag.dE
				worst = max(worst, diag.dE / (1.0 + abs(E_prev)))
	return max(worst, 0.0)


def selfcheck(seed: int = 42, perturb_gradient=None) -> SelfCheckReport:
	"""Run every discrete identity check on seeded small grids."""
	rng = rng_for(seed)
	report = SelfCheckReport(seed)
	add = report.results.append
	add(CheckResult("summation_by_parts", _sbp_residual(rng), 1e-12))
	add(CheckResult("hessian_self_adjoint", _hessian_residual(rng), 1e-12))
	for d in (2, 3):
		add(CheckResult(f"gradient_oracle_{d}d", gradient_check(d, 8, seed, perturb=perturb_gradient), 1e-6))
	add(CheckResult("phi1_q_identity", _identity_residual(), 1e-12))
	add(CheckResult("parseval", _parseval_residual(rng), 1e-12))
	add(CheckResult("norm_chain", _norm_chain_violation(rng), 1e-12))
	add(CheckResult("form_equivalence", _form_residual(rng), 1e-11))
	add(CheckResult("energy_dissipation", _dissipation_residual(rng), 1e-10))
	for r in report.results:
		log = logger.info if r.passed else logger.warning
		log("selfcheck %s: residual %.3e (tol %.1e)", r.name, r.residual, r.tolerance)
	return report
