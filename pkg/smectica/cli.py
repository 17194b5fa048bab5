# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

import argparse
import logging
import os
import sys

from smectica import __version__
from smectica.config import RunConfig, apply_overrides, config_from_dict, parse_config_text, save_config
from smectica.exceptions import ConfigError, InvariantViolation, SinkError, SmecticaError
from smectica.harness import convergence_space, convergence_time, gradient_check, mode_contrast, selfcheck
from smectica.initial import build_initial
from smectica.io import CSVDiagnosticsSink, SnapshotSink, read_snapshot, state_from_snapshot
from smectica.presets import PRESETS, preset_values
from smectica.stepper import Mode, Solver, initial_state
from smectica.utils import throw

logger = logging.getLogger("smectica")


def _raw_config(args) -> dict:
	if getattr(args, "config", None):
		try:
			with open(args.config, encoding="utf-8") as f:
				values = parse_config_text(f.read())
		except OSError as e:
			throw(f"cannot read config {args.config}: {e.strerror}", ConfigError)
	else:
		values = preset_values(args.preset)
	values = apply_overrides(values, args.set)
	for flag, key in (("seed", "seed"), ("tau", "tau"), ("T_final", "T_final"), ("mode", "mode")):
		value = getattr(args, flag, None)
		if value is not None:
			values[key] = value
	if getattr(args, "snapshot_every", None) is not None:
		values["snapshot_every"] = args.snapshot_every
	if getattr(args, "mbp_monitor", False):
		values["mbp_monitor"] = True
	return values


def build_config(args) -> RunConfig:
	return config_from_dict(_raw_config(args))


def _write_text(path, text):
	try:
		with open(path, "w", encoding="utf-8") as f:
			f.write(text)
	except OSError as e:
		throw(f"cannot write {path}: {e.strerror}", SinkError, path=str(path))


def cmd_run(args) -> int:
	cfg = build_config(args).replace(output_dir=args.out)
	try:
		os.makedirs(args.out, exist_ok=True)
	except OSError as e:
		throw(f"cannot create output directory {args.out}: {e.strerror}", SinkError, path=args.out)
	_write_text(os.path.join(args.out, "config.txt"), save_config(cfg))

	params = cfg.params()
	if args.restart:
		state = state_from_snapshot(read_snapshot(args.restart))
		if state.Q.grid != cfg.grid():
			throw(f"snapshot grid {state.Q.grid} does not match the config grid {cfg.grid()}", ConfigError)
		logger.info("restarting from %s at t=%.6g", args.restart, state.t)
	else:
		Q0, u0 = build_initial(cfg)
		state = initial_state(Q0, u0, params)

	sinks = [
		CSVDiagnosticsSink(os.path.join(args.out, "diagnostics.csv")),
		SnapshotSink(os.path.join(args.out, "snapshots"), cfg.snapshot_every),
	]
	summary = Solver(cfg.step_config(), cfg.grid()).run(state, cfg.T_final, sinks)
	_write_text(
		os.path.join(args.out, "summary.txt"),
		"".join(f"{key} = {value!r}\n" for key, value in summary.as_dict().items()),
	)
	print(f"{summary.steps} steps, t = {summary.t:.6g}, E_modified = {summary.E_modified_final:.12g}")
	if summary.mbp_violations:
		print(f"maximum bound violated at {summary.mbp_violations} of {summary.mbp_checks} checked steps")
	return 0


def cmd_preset(args) -> int:
	text = save_config(build_config(args))
	if args.out:
		_write_text(args.out, text)
	else:
		sys.stdout.write(text)
	return 0


def cmd_conv_time(args) -> int:
	cfg = build_config(args)
	if args.J:
		cfg = cfg.replace(J=args.J)
	taus = args.taus or [2.0**-k for k in range(6, 12)]
	table = convergence_time(cfg, taus, args.tau_ref, args.T_final or cfg.T_final)
	print(table.format())
	return 0


def cmd_conv_space(args) -> int:
	cfg = build_config(args)
	table = convergence_space(cfg, args.J_ladder, args.tau_step, args.J_ref, args.T_final or cfg.T_final)
	print(table.format())
	return 0


def cmd_contrast(args) -> int:
	cfg = build_config(args)
	if args.J:
		cfg = cfg.replace(J=args.J)
	report = mode_contrast(cfg, args.tau_step, args.T_final or cfg.T_final)
	print(report.format())
	return 0


def cmd_gradcheck(args) -> int:
	failed = False
	for d in args.d:
		residual = gradient_check(d, args.J, args.seed)
		ok = residual <= 1e-6
		failed |= not ok
		print(f"d={d} J={args.J}: relative residual {residual:.3e} {'ok' if ok else 'FAILED'}")
	return InvariantViolation.exit_code if failed else 0


def cmd_selfcheck(args) -> int:
	report = selfcheck(args.seed)
	print(report.format())
	return 0 if report.passed else InvariantViolation.exit_code


def _add_source(parser, default_preset=None):
	source = parser.add_mutually_exclusive_group(required=default_preset is None)
	source.add_argument("--config", help="flat key = value config file")
	source.add_argument("--preset", choices=sorted(PRESETS), default=default_preset)
	parser.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")


def make_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(
		prog="smectica", description="Q-tensor / smectic density gradient flow solver"
	)
	parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
	verbosity = parser.add_mutually_exclusive_group()
	verbosity.add_argument("-v", "--verbose", action="store_true", help="log every step")
	verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
	sub = parser.add_subparsers(dest="command", required=True)

	run = sub.add_parser("run", help="integrate a configuration and write diagnostics")
	_add_source(run)
	run.add_argument("--seed", type=int, required=True)
	run.add_argument("--out", required=True, help="output directory")
	run.add_argument("--tau", type=float)
	run.add_argument("--T-final", dest="T_final", type=float)
	run.add_argument("--mode", choices=[m.value for m in Mode])
	run.add_argument("--snapshot-every", type=int)
	run.add_argument("--mbp-monitor", action="store_true")
	run.add_argument("--restart", help="snapshot to continue from")
	run.set_defaults(func=cmd_run)

	show = sub.add_parser("preset", help="print a preset as config text")
	show.add_argument("preset", choices=sorted(PRESETS))
	show.add_argument("--set", action="append", metavar="KEY=VALUE")
	show.add_argument("--seed", type=int)
	show.add_argument("--out", help="write to a file instead of stdout")
	show.set_defaults(func=cmd_preset)

	conv_time = sub.add_parser("conv-time", help="temporal convergence study")
	_add_source(conv_time, "conv2d")
	conv_time.add_argument("--J", type=int, default=64)
	conv_time.add_argument("--taus", type=float, nargs="+")
	conv_time.add_argument("--tau-ref", type=float, default=2.0**-13)
	conv_time.add_argument("--T-final", dest="T_final", type=float)
	conv_time.set_defaults(func=cmd_conv_time)

	conv_space = sub.add_parser("conv-space", help="spatial convergence study")
	_add_source(conv_space, "smooth2d")
	conv_space.add_argument("--J-ladder", type=int, nargs="+", default=[16, 32, 64, 128])
	conv_space.add_argument("--J-ref", type=int, default=256)
	conv_space.add_argument("--tau", dest="tau_step", type=float, default=1e-4)
	conv_space.add_argument("--T-final", dest="T_final", type=float)
	conv_space.set_defaults(func=cmd_conv_space)

	contrast = sub.add_parser("contrast", help="count energy increases of each mode on the same run")
	_add_source(contrast, "dynamics2d")
	contrast.add_argument("--J", type=int, default=64)
	contrast.add_argument("--tau", dest="tau_step", type=float, default=0.05)
	contrast.add_argument("--T-final", dest="T_final", type=float, default=10.0)
	contrast.set_defaults(func=cmd_contrast)

	grad = sub.add_parser("gradcheck", help="compare energy gradients with finite differences")
	grad.add_argument("--d", type=int, nargs="+", default=[2, 3], choices=[2, 3])
	grad.add_argument("--J", type=int, default=8)
	grad.add_argument("--seed", type=int, default=42)
	grad.set_defaults(func=cmd_gradcheck)

	check = sub.add_parser("selfcheck", help="run the discrete identity checks")
	check.add_argument("--seed", type=int, default=42)
	check.set_defaults(func=cmd_selfcheck)
	return parser


def main(argv=None) -> int:
	args = make_parser().parse_args(argv)
	level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
	logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
	try:
		return args.func(args)
	except SmecticaError as e:
		logger.error("%s", e)
		return e.exit_code


if __name__ == "__main__":
	sys.exit(main())
