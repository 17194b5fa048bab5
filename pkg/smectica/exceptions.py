# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt


class SmecticaError(Exception):
	exit_code = 1


class ArgumentError(SmecticaError, ValueError):
	"""Bad argument to an operator: axis out of range, grid mismatch, wrong dimension."""


class ConstraintError(SmecticaError):
	"""A structural constraint (traceless, symmetric) does not hold."""


class ConfigError(SmecticaError):
	exit_code = 2


class ParameterError(ConfigError):
	"""Physical or stabilization parameters outside their admissible range."""


class NumericalBlowup(SmecticaError):
	exit_code = 3
	step_index = None
	magnitude = None


class InvariantViolation(SmecticaError):
	exit_code = 4
	step_index = None
	residual = None


class InternalError(SmecticaError):
	pass


class SinkError(SmecticaError):
	"""Writing diagnostics or snapshots failed."""

	path = None
