# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""
Run configuration.

Configs are flat ``key = value`` text with ``#`` comments. Text is parsed into a plain dict,
coerced key by key against :data:`CONFIG_KEYS` and turned into a frozen :class:`RunConfig`
whose construction performs every physical and numerical check before any array exists.
"""

import math
from dataclasses import dataclass, fields

from smectica.energy import ModelParams
from smectica.exceptions import ArgumentError, ConfigError, SmecticaError
from smectica.grid import GridSpec
from smectica.stepper import Mode, StepConfig, TimeController
from smectica.utils import parse_bool, throw, validate_type

INITIAL_Q_KINDS = ("zero", "random", "director")
INITIAL_U_KINDS = ("zero", "random", "layers", "target", "separable")

REQUIRED = object()

# key -> (type, default); canonical order for save_config
CONFIG_KEYS = {
	"d": (int, REQUIRED),
	"J": (int, REQUIRED),
	"L": (float, REQUIRED),
	"K": (float, REQUIRED),
	"A": (float, REQUIRED),
	"B": (float, 0.0),
	"C": (float, REQUIRED),
	"a": (float, REQUIRED),
	"b": (float, REQUIRED),
	"c": (float, REQUIRED),
	"q": (float, REQUIRED),
	"B0": (float, REQUIRED),
	"kappa1": (float, REQUIRED),
	"kappa2": (float, REQUIRED),
	"eta0": (float, 0.95),
	"initial_q": (str, "random"),
	"q_amplitude": (float, 0.05),
	"initial_u": (str, "zero"),
	"u_amplitude": (float, 0.25),
	"mode": (str, Mode.RELAXED.value),
	"controller": (str, "fixed"),
	"tau": (float, None),
	"tau_min": (float, None),
	"tau_max": (float, None),
	"alpha": (float, 0.0),
	"T_final": (float, REQUIRED),
	"seed": (int, 42),
	"assert_dissipation": (bool, True),
	"mbp_monitor": (bool, False),
	"check_form_equivalence": (bool, False),
	"snapshot_every": (int, 0),
	"output_dir": (str, None),
}

PARAM_KEYS = ("d", "K", "A", "B", "C", "a", "b", "c", "q", "B0", "kappa1", "kappa2", "eta0")


def coerce(key, value):
	if key not in CONFIG_KEYS:
		throw(f"unknown config key {key!r}", ConfigError)
	kind = CONFIG_KEYS[key][0]
	if value is None:
		return None
	try:
		if kind is bool:
			return parse_bool(value)
		if kind is int:
			if isinstance(value, float) and not value.is_integer():
				raise ValueError(value)
			return int(str(value).strip()) if isinstance(value, str) else int(value)
		if kind is float:
			return float(value)
		return str(value).strip()
	except (TypeError, ValueError):
		throw(f"config key {key!r} expects {kind.__name__}, got {value!r}", ConfigError)


@dataclass(frozen=True)
class RunConfig:
	d: int
	J: int
	L: float
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
	T_final: float
	B: float = 0.0
	eta0: float = 0.95
	initial_q: str = "random"
	q_amplitude: float = 0.05
	initial_u: str = "zero"
	u_amplitude: float = 0.25
	mode: str = Mode.RELAXED.value
	controller: str = "fixed"
	tau: float | None = None
	tau_min: float | None = None
	tau_max: float | None = None
	alpha: float = 0.0
	seed: int = 42
	assert_dissipation: bool = True
	mbp_monitor: bool = False
	check_form_equivalence: bool = False
	snapshot_every: int = 0
	output_dir: str | None = None

	def __post_init__(self):
		if self.initial_q not in INITIAL_Q_KINDS:
			throw(f"initial_q must be one of {INITIAL_Q_KINDS}, got {self.initial_q!r}", ConfigError)
		if self.initial_u not in INITIAL_U_KINDS:
			throw(f"initial_u must be one of {INITIAL_U_KINDS}, got {self.initial_u!r}", ConfigError)
		if self.mode not in [m.value for m in Mode]:
			throw(f"mode must be one of {[m.value for m in Mode]}, got {self.mode!r}", ConfigError)
		if not (math.isfinite(self.T_final) and self.T_final >= 0):
			throw(f"T_final must be a non-negative number, got {self.T_final}", ConfigError)
		if not 0 <= self.seed < 2**64:
			throw(f"seed must be a 64-bit unsigned integer, got {self.seed}", ConfigError)
		if self.snapshot_every < 0:
			throw(f"snapshot_every must be >= 0, got {self.snapshot_every}", ConfigError)
		for key in ("q_amplitude", "u_amplitude"):
			if not getattr(self, key) >= 0:
				throw(f"{key} must be >= 0, got {getattr(self, key)}", ConfigError)
		# ParameterError is already a ConfigError
		self.params()
		try:
			self.grid()
			self.time_controller()
		except ArgumentError as e:
			throw(str(e), ConfigError)

	def params(self) -> ModelParams:
		return ModelParams(**{key: getattr(self, key) for key in PARAM_KEYS})

	def grid(self) -> GridSpec:
		return GridSpec(self.d, self.J, self.L)

	def time_controller(self) -> TimeController:
		if self.controller == "fixed":
			return TimeController.fixed(self.tau)
		if self.controller == "adaptive":
			return TimeController.adaptive(self.tau_min, self.tau_max, self.alpha)
		throw(f"controller must be 'fixed' or 'adaptive', got {self.controller!r}", ConfigError)

	def step_config(self) -> StepConfig:
		return StepConfig(
			params=self.params(),
			controller=self.time_controller(),
			mode=Mode(self.mode),
			assert_dissipation=self.assert_dissipation,
			mbp_monitor=self.mbp_monitor,
			check_form_equivalence=self.check_form_equivalence,
		)

	def as_dict(self) -> dict:
		return {f.name: getattr(self, f.name) for f in fields(self)}

	def replace(self, **changes) -> "RunConfig":
		values = self.as_dict()
		values.update(changes)
		return config_from_dict(values)


def config_from_dict(values: dict) -> RunConfig:
	"""Coerce, default and validate a flat mapping of config keys."""
	clean = {}
	for key, value in values.items():
		clean[key] = coerce(key, value)
	missing = [
		key for key, (_, default) in CONFIG_KEYS.items() if default is REQUIRED and clean.get(key) is None
	]
	if missing:
		throw(f"missing required config key(s): {', '.join(missing)}", ConfigError)
	for key, (_, default) in CONFIG_KEYS.items():
		if clean.get(key) is None and default is not REQUIRED:
			clean[key] = default
	try:
		return RunConfig(**clean)
	except SmecticaError:
		raise
	except (TypeError, ValueError) as e:
		throw(f"invalid configuration: {e}", ConfigError)


def parse_config_text(text: str) -> dict:
	values = {}
	for lineno, raw in enumerate(text.splitlines(), start=1):
		line = raw.split("#", 1)[0].strip()
		if not line:
			continue
		if "=" not in line:
			throw(f"line {lineno}: expected 'key = value', got {raw.strip()!r}", ConfigError)
		key, value = (part.strip() for part in line.split("=", 1))
		if key not in CONFIG_KEYS:
			throw(f"line {lineno}: unknown config key {key!r}", ConfigError)
		if key in values:
			throw(f"line {lineno}: duplicate config key {key!r}", ConfigError)
		values[key] = value
	return values


@validate_type
def load_config(text: str) -> RunConfig:
	return config_from_dict(parse_config_text(text))


def format_value(value) -> str:
	if isinstance(value, bool):
		return "true" if value else "false"
	if isinstance(value, float):
		return repr(value)
	return str(value)


def save_config(cfg: RunConfig) -> str:
	values = cfg.as_dict()
	lines = [
		f"{key} = {format_value(values[key])}" for key in CONFIG_KEYS if values.get(key) is not None
	]
	return "\n".join(lines) + "\n"


def apply_overrides(values: dict, pairs) -> dict:
	"""Apply ``key=value`` strings (as given to ``--set``) to a raw config mapping."""
	out = dict(values)
	for pair in pairs or ():
		if "=" not in pair:
			throw(f"override must look like key=value, got {pair!r}", ConfigError)
		key, value = (part.strip() for part in pair.split("=", 1))
		out[key] = coerce(key, value)
	return out
