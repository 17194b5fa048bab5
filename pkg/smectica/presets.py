# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

import math

from smectica.config import RunConfig, config_from_dict
from smectica.exceptions import ConfigError
from smectica.utils import throw, validate_type

# T = -1, T1* = 0, T2* = 4 gives A = -1, a = -5 and s_plus = 1
SMECTIC_A = {
	"d": 2,
	"L": 2 * math.pi,
	"K": 0.1,
	"A": -1.0,
	"C": 2.0,
	"a": -5.0,
	"b": 0.0,
	"c": 5.0,
	"q": 5.0,
	"B0": 7e-5,
	"kappa1": 8.0,
	"kappa2": 8.0,
}


def _conv2d():
	return dict(
		SMECTIC_A,
		J=128,
		initial_q="director",
		initial_u="layers",
		u_amplitude=0.25,
		controller="fixed",
		tau=2.0**-7,
		T_final=1.0,
	)


def _dynamics2d():
	return dict(
		SMECTIC_A,
		J=128,
		initial_q="random",
		q_amplitude=0.05,
		initial_u="zero",
		controller="fixed",
		tau=2.0**-5,
		T_final=50.0,
	)


def _target2d():
	return dict(
		SMECTIC_A,
		J=100,
		initial_q="random",
		q_amplitude=0.05,
		initial_u="target",
		u_amplitude=0.25,
		controller="adaptive",
		tau_min=1e-3,
		tau_max=0.1,
		alpha=1e5,
		T_final=200.0,
	)


def _smectic3d():
	return dict(
		SMECTIC_A,
		d=3,
		B=1.0,
		J=64,
		initial_q="random",
		q_amplitude=0.05,
		initial_u="separable",
		u_amplitude=0.25,
		controller="fixed",
		tau=2.0**-5,
		T_final=100.0,
	)


def _smooth2d():
	return dict(_conv2d(), q=1.0, J=64, tau=1e-4, T_final=0.1)


def _layers2d(q, B0):
	def build():
		return dict(_dynamics2d(), q=q, B0=B0, initial_u="random", u_amplitude=0.05)

	return build


PRESETS = {
	"conv2d": _conv2d,
	"dynamics2d": _dynamics2d,
	"target2d": _target2d,
	"smectic3d": _smectic3d,
	"smooth2d": _smooth2d,
	"layers2d_q1": _layers2d(1.0, 1e-2),
	"layers2d_q2": _layers2d(2.0, 1e-2),
	"layers2d_q4": _layers2d(4.0, 1e-3),
	"layers2d_q7": _layers2d(7.0, 1e-3),
}


def preset_values(name: str) -> dict:
	if name not in PRESETS:
		throw(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}", ConfigError)
	return PRESETS[name]()


@validate_type
def preset(name: str, **overrides) -> RunConfig:
	values = preset_values(name)
	values.update(overrides)
	return config_from_dict(values)
