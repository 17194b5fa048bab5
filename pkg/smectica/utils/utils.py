# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt


import inspect
import numbers
from functools import wraps

from smectica.exceptions import SmecticaError

__all__ = ["parse_bool", "throw", "validate_type"]


def throw(msg, exc=SmecticaError, **kwargs):
	"""Raise `exc` with `msg`. Extra keyword arguments are set as attributes on the exception."""
	err = exc(msg)
	for key, value in kwargs.items():
		setattr(err, key, value)
	raise err


def _matches(value, annotation):
	if annotation is float:
		return isinstance(value, numbers.Real) and not isinstance(value, bool)
	if annotation is int:
		return isinstance(value, numbers.Integral) and not isinstance(value, bool)
	if isinstance(annotation, tuple):
		return any(_matches(value, a) for a in annotation)
	if not isinstance(annotation, type):
		# typing constructs (unions, generics) are not checked
		return True
	return isinstance(value, annotation)


def validate_type(func):
	@wraps(func)
	def wrapper(*args, **kwargs):
		sig = inspect.signature(func)
		annotated_types = {
			k: v.annotation for k, v in sig.parameters.items() if v.annotation != inspect._empty
		}
		bound_args = sig.bind(*args, **kwargs)
		bound_args.apply_defaults()
		for arg_name, arg_value in bound_args.arguments.items():
			if arg_name in annotated_types:
				if arg_value is not None and not _matches(arg_value, annotated_types[arg_name]):
					raise TypeError(
						f"{func.__name__}: Argument {arg_name} must be of type {annotated_types[arg_name]}"
					)
		return func(*args, **kwargs)

	return wrapper


def parse_bool(value):
	if isinstance(value, bool):
		return value
	text = str(value).strip().lower()
	if text in ("1", "true", "yes", "on"):
		return True
	if text in ("0", "false", "no", "off"):
		return False
	raise ValueError(f"not a boolean: {value!r}")
