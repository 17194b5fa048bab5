# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""
Exponential-integrator time stepping with a relaxed scalar auxiliary variable.

One step freezes the relaxation factor ``g = exp(s - E1h)`` at the current state, moves Q and u
with the exact exponential of the stabilised linear operators, advances ``s`` with the
explicit energy increment and finally pulls ``s`` back towards the true E1h as far as the
dissipation budget allows.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from smectica import grid as fd
from smectica.energy import (
	ModelParams,
	coupling_source_sup,
	e1h,
	kappa0,
	mbp_eta,
	quadratic_energy,
	stabilized_nonlinear,
)
from smectica.exceptions import ArgumentError, InvariantViolation, NumericalBlowup
from smectica.qtensor import QField, frobenius_inner, sup_frobenius
from smectica.spectral import SpectralPlan, etd_update, quasi_implicit_update, weighted_norm
from smectica.utils import throw

logger = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e8
DISSIPATION_TOL = 1e-10
FORM_TOL = 1e-11
MBP_TOL = 1e-8
LANDING_TOL = 1e-9


class Mode(str, Enum):
	RELAXED = "RelaxedGSAV"
	NO_RELAX = "GSAVNoRelax"
	PLAIN = "PlainETD"


@dataclass(frozen=True)
class TimeController:
	kind: str
	tau: float | None = None
	tau_min: float | None = None
	tau_max: float | None = None
	alpha: float = 0.0

	def __post_init__(self):
		if self.kind == "fixed":
			if self.tau is None or not self.tau > 0:
				throw(f"fixed time step must be positive, got tau={self.tau}", ArgumentError)
		elif self.kind == "adaptive":
			if self.tau_min is None or self.tau_max is None or not 0 < self.tau_min <= self.tau_max:
				throw(
					f"adaptive controller needs 0 < tau_min <= tau_max, got {self.tau_min}, {self.tau_max}",
					ArgumentError,
				)
			if not self.alpha >= 0:
				throw(f"alpha >= 0 required, got alpha={self.alpha}", ArgumentError)
		else:
			throw(f"controller kind must be 'fixed' or 'adaptive', got {self.kind!r}", ArgumentError)

	@classmethod
	def fixed(cls, tau: float) -> "TimeController":
		return cls("fixed", tau=tau)

	@classmethod
	def adaptive(cls, tau_min: float, tau_max: float, alpha: float) -> "TimeController":
		return cls("adaptive", tau_min=tau_min, tau_max=tau_max, alpha=alpha)

	@property
	def initial_tau(self) -> float:
		return self.tau if self.kind == "fixed" else self.tau_min


@dataclass(frozen=True)
class StepConfig:
	params: ModelParams
	controller: TimeController
	mode: Mode = Mode.RELAXED
	assert_dissipation: bool = True
	mbp_monitor: bool = False
	check_form_equivalence: bool = False

	def __post_init__(self):
		object.__setattr__(self, "mode", Mode(self.mode))


@dataclass
class SolverState:
	Q: QField
	u: np.ndarray
	s: float
	t: float = 0.0
	step_index: int = 0
	# cached E1h and quadratic energy of (Q, u)
	e1: float | None = field(default=None, repr=False)
	quadratic: float | None = field(default=None, repr=False)

	def energies(self, params: ModelParams) -> tuple[float, float]:
		if self.e1 is None:
			self.e1 = e1h(self.Q, self.u, params)
		if self.quadratic is None:
			self.quadratic = quadratic_energy(self.Q, self.u, params)
		return self.e1, self.quadratic


@dataclass
class StepDiagnostics:
	step: int
	t: float
	tau_used: float
	g: float
	s_tilde: float
	xi: float
	R: float
	e1h: float
	s: float
	E_modified: float
	E_original: float
	sup_F: float
	max_u: float
	min_u: float
	dE: float = 0.0


@dataclass
class RunSummary:
	steps: int = 0
	t: float = 0.0
	E_modified_initial: float = 0.0
	E_original_initial: float = 0.0
	E_modified_final: float = 0.0
	E_original_final: float = 0.0
	e1h_final: float = 0.0
	s_final: float = 0.0
	g_min: float = math.inf
	g_max: float = -math.inf
	max_sav_gap: float = 0.0
	tau_min_used: float = math.inf
	tau_max_used: float = 0.0
	energy_increases: int = 0
	max_energy_increase: float = 0.0
	mbp_eta: float | None = None
	mbp_checks: int = 0
	mbp_violations: int = 0

	def as_dict(self) -> dict:
		return dict(self.__dict__)


def initial_state(Q: QField, u, params: ModelParams, t: float = 0.0) -> SolverState:
	"""Start with s = E1h(Q, u), so the first relaxation factor is exactly one."""
	u = np.array(Q.grid.check(u, "u"), dtype=float)
	state = SolverState(Q.copy(), u, 0.0, t)
	state.s = state.energies(params)[0]
	return state


def relaxation_xi(e1_next: float, s_tilde: float, R: float, tau: float, eta0: float) -> float:
	"""Blend weight for s; the budget eta0 * tau is capped at one so dissipation holds for any tau."""
	gap = e1_next - s_tilde
	if gap <= 0:
		return 0.0
	budget = min(eta0, 1.0 / tau) * tau * R
	return min(1.0, max(0.0, 1.0 - budget / gap))


def dissipation_rate(dQ: QField, du, tau: float, g: float, params: ModelParams, plan: SpectralPlan) -> float:
	cL = plan.coeffs("L", g, params)
	cD = plan.coeffs("D", g, params)
	return (weighted_norm(dQ, plan, cL, tau, "Q1") + weighted_norm(du, plan, cD, tau, "Q1")) / tau


def adaptive_tau(dE: float, ctl: TimeController) -> float:
	if ctl.kind != "adaptive":
		throw("adaptive_tau needs an adaptive controller", ArgumentError)
	return max(ctl.tau_min, ctl.tau_max / math.sqrt(1.0 + ctl.alpha * dE * dE))


class Sink:
	"""Receives every completed step of a run."""

	def begin(self, state: SolverState, params: ModelParams):
		pass

	def emit(self, state: SolverState, diag: StepDiagnostics):
		raise NotImplementedError

	def close(self):
		pass


class MaximumBoundMonitor:
	"""Tracks the pointwise bound eta and checks sup|Q|_F against it while the stabilisation
	hypothesis kappa1 >= kappa0 / min(g_min, 1) holds."""

	def __init__(self, params: ModelParams, Q0: QField):
		self.params = params
		self.sup_Q0 = sup_frobenius(Q0)
		self.S = 0.0
		self.sup_u2 = 0.0
		self.g_min = math.inf
		self.eta = self.sup_Q0
		self.kappa0 = None
		self.checks = 0
		self.violations = 0
		self._warned = False

	def observe(self, Q: QField, u, g: float, Q_next: QField, step_index: int) -> bool:
		p = self.params
		self.S = max(self.S, coupling_source_sup(Q, u, p))
		self.sup_u2 = max(self.sup_u2, float(np.max(u * u)))
		self.g_min = min(self.g_min, g)
		self.eta = mbp_eta(p, self.sup_Q0, self.S)
		self.kappa0 = kappa0(p, self.eta, self.sup_u2)
		if p.kappa1 < self.kappa0 / min(self.g_min, 1.0):
			if not self._warned:
				logger.warning(
					"maximum bound not guaranteed at step %d: kappa1=%.6g < kappa0/min(g_min, 1)=%.6g",
					step_index,
					p.kappa1,
					self.kappa0 / min(self.g_min, 1.0),
				)
				self._warned = True
			return True
		self.checks += 1
		sup_next = sup_frobenius(Q_next)
		if sup_next > self.eta * (1.0 + MBP_TOL):
			self.violations += 1
			logger.warning(
				"maximum bound violated at step %d: sup|Q|_F=%.12g > eta=%.12g",
				step_index,
				sup_next,
				self.eta,
			)
			return False
		return True


class Solver:
	def __init__(self, cfg: StepConfig, grid: fd.GridSpec):
		if grid.d != cfg.params.d:
			throw(f"grid dimension {grid.d} does not match parameter dimension {cfg.params.d}", ArgumentError)
		self.cfg = cfg
		self.params = cfg.params
		self.grid = grid
		self.plan = SpectralPlan(grid)
		self.monitor = None

	def _check_finite(self, values, step_index):
		magnitude = float(np.max(np.abs(values)))
		if not math.isfinite(magnitude) or magnitude > BLOWUP_THRESHOLD:
			throw(
				f"numerical blow-up at step {step_index}: max magnitude {magnitude:.6g}",
				NumericalBlowup,
				step_index=step_index,
				magnitude=magnitude,
			)

	def _advance(self, values, coeffs, nonlin, tau, step_index):
		plan = self.plan
		vh, nh = plan.forward(values), plan.forward(nonlin)
		out = etd_update(vh, coeffs, nh, tau)
		if self.cfg.check_form_equivalence:
			alt = quasi_implicit_update(vh, coeffs, nh, tau)
			residual = float(np.max(np.abs(out - alt)) / max(np.max(np.abs(out)), np.finfo(float).tiny))
			if residual > FORM_TOL:
				throw(
					f"update forms disagree at step {step_index} (relative {residual:.3e})",
					InvariantViolation,
					step_index=step_index,
					residual=residual,
				)
		return plan.inverse(out)

	def step(self, state: SolverState, tau: float, t_next: float | None = None):
		if not tau > 0:
			throw(f"time step must be positive, got tau={tau}", ArgumentError)
		p, mode = self.params, self.cfg.mode
		n1 = state.step_index + 1
		e1, quad = state.energies(p)
		E_old = quad + (e1 if mode == Mode.PLAIN else state.s)

		try:
			terms = stabilized_nonlinear(state.Q, state.u, e1 if mode == Mode.PLAIN else state.s, p, e1=e1)
		except NumericalBlowup as e:
			e.step_index = n1
			raise
		g, H, mu, Nq, Nu = terms.g, terms.H, terms.mu, terms.Nq, terms.Nu

		cL = self.plan.coeffs("L", g, p)
		cD = self.plan.coeffs("D", g, p)
		Q_next = QField(self.grid, self._advance(state.Q.comps, cL, Nq.comps, tau, n1))
		u_next = self._advance(state.u, cD, Nu, tau, n1)
		self._check_finite(Q_next.comps, n1)
		self._check_finite(u_next, n1)

		dQ, du = Q_next - state.Q, u_next - state.u
		s_tilde = state.s + g * (frobenius_inner(H, dQ) + fd.inner(mu, du, self.grid))
		R = dissipation_rate(dQ, du, tau, g, p, self.plan)
		e1_next = e1h(Q_next, u_next, p)
		quad_next = quadratic_energy(Q_next, u_next, p)

		if mode == Mode.RELAXED:
			xi = relaxation_xi(e1_next, s_tilde, R, tau, p.eta0)
			s_next = xi * s_tilde + (1.0 - xi) * e1_next
		elif mode == Mode.NO_RELAX:
			xi, s_next = 1.0, s_tilde
		else:
			xi, s_next = 0.0, e1_next
		if not math.isfinite(s_next):
			throw(
				f"auxiliary variable is not finite at step {n1}",
				NumericalBlowup,
				step_index=n1,
				magnitude=s_next,
			)

		E_modified = quad_next + s_next
		dE = E_modified - E_old
		if self.cfg.assert_dissipation and mode != Mode.PLAIN and dE > DISSIPATION_TOL * (1.0 + abs(E_old)):
			throw(
				f"modified energy increased by {dE:.6g} at step {n1}",
				InvariantViolation,
				step_index=n1,
				residual=dE,
			)

		if self.cfg.mbp_monitor:
			if self.monitor is None:
				self.monitor = MaximumBoundMonitor(p, state.Q)
			self.monitor.observe(state.Q, state.u, g, Q_next, n1)

		new_state = SolverState(
			Q_next,
			u_next,
			s_next,
			state.t + tau if t_next is None else t_next,
			n1,
			e1=e1_next,
			quadratic=quad_next,
		)
		diag = StepDiagnostics(
			step=n1,
			t=new_state.t,
			tau_used=tau,
			g=g,
			s_tilde=s_tilde,
			xi=xi,
			R=R,
			e1h=e1_next,
			s=s_next,
			E_modified=E_modified,
			E_original=quad_next + e1_next,
			sup_F=sup_frobenius(Q_next),
			max_u=float(np.max(u_next)),
			min_u=float(np.min(u_next)),
			dE=dE,
		)
		logger.debug("step %d t=%.6g tau=%.3g g=%.12g xi=%.6g R=%.6g", n1, diag.t, tau, g, xi, R)
		return new_state, diag

	def run(self, initial: SolverState, T_final: float, sinks=()) -> RunSummary:
		p, ctl = self.params, self.cfg.controller
		if T_final < initial.t:
			throw(f"T_final={T_final} lies before the initial time {initial.t}", ArgumentError)
		e1, quad = initial.energies(p)
		E0_mod = quad + (e1 if self.cfg.mode == Mode.PLAIN else initial.s)
		summary = RunSummary(
			t=initial.t,
			E_modified_initial=E0_mod,
			E_original_initial=quad + e1,
			E_modified_final=E0_mod,
			E_original_final=quad + e1,
			e1h_final=e1,
			s_final=initial.s,
			max_sav_gap=abs(initial.s - e1),
		)
		for sink in sinks:
			sink.begin(initial, p)

		logger.info(
			"run start: mode=%s t=%.6g T_final=%.6g J=%d d=%d",
			self.cfg.mode.value,
			initial.t,
			T_final,
			self.grid.J,
			self.grid.d,
		)
		state, tau = initial, ctl.initial_tau
		try:
			while state.t < T_final:
				t_next = None
				if T_final - (state.t + tau) < LANDING_TOL * tau:
					tau, t_next = T_final - state.t, T_final
				state, diag = self.step(state, tau, t_next)
				self._tally(summary, diag)
				for sink in sinks:
					sink.emit(state, diag)
				if ctl.kind == "adaptive":
					tau = adaptive_tau(diag.dE / diag.tau_used, ctl)
		finally:
			for sink in sinks:
				sink.close()

		summary.t = state.t
		summary.s_final = state.s
		if self.monitor is not None:
			summary.mbp_eta = self.monitor.eta
			summary.mbp_checks = self.monitor.checks
			summary.mbp_violations = self.monitor.violations
		logger.info(
			"run finished: %d steps, t=%.6g, E_modified %.12g -> %.12g",
			summary.steps,
			summary.t,
			summary.E_modified_initial,
			summary.E_modified_final,
		)
		return summary

	def _tally(self, summary: RunSummary, diag: StepDiagnostics):
		summary.steps += 1
		summary.E_modified_final = diag.E_modified
		summary.E_original_final = diag.E_original
		summary.e1h_final = diag.e1h
		summary.g_min = min(summary.g_min, diag.g)
		summary.g_max = max(summary.g_max, diag.g)
		summary.max_sav_gap = max(summary.max_sav_gap, abs(diag.s - diag.e1h))
		summary.tau_min_used = min(summary.tau_min_used, diag.tau_used)
		summary.tau_max_used = max(summary.tau_max_used, diag.tau_used)
		E_prev = diag.E_modified - diag.dE
		if diag.dE > 1e-6 * (1.0 + abs(E_prev)):
			summary.energy_increases += 1
			summary.max_energy_increase = max(summary.max_energy_increase, diag.dE)
			if self.cfg.mode == Mode.PLAIN:
				logger.warning("energy increased by %.6g at step %d", diag.dE, diag.step)


def step(state: SolverState, tau: float, cfg: StepConfig):
	return Solver(cfg, state.Q.grid).step(state, tau)


def run(initial: SolverState, cfg: StepConfig, T_final: float, sinks=()) -> RunSummary:
	return Solver(cfg, initial.Q.grid).run(initial, T_final, sinks)


def with_mode(cfg: StepConfig, mode: Mode) -> StepConfig:
	return replace(cfg, mode=mode)
