# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

import csv
import math
import os
import tempfile
import unittest

import numpy as np

from smectica.exceptions import SinkError
from smectica.grid import GridSpec
from smectica.io import (
	DIAGNOSTICS_HEADER,
	CSVDiagnosticsSink,
	MemorySink,
	SnapshotSink,
	export_field_csv,
	read_diagnostics,
	read_snapshot,
	snapshot_from_state,
	state_from_snapshot,
	write_diagnostics,
	write_snapshot,
)
from smectica.stepper import Solver, StepConfig, TimeController, initial_state
from smectica.test_energy import make_params, random_state


class IOTestCase(unittest.TestCase):
	def setUp(self):
		self._tmp = tempfile.TemporaryDirectory()
		self.tmp = self._tmp.name
		self.addCleanup(self._tmp.cleanup)

	def path(self, name):
		return os.path.join(self.tmp, name)


class TestDiagnostics(IOTestCase):
	def test_empty_records_header_only(self):
		write_diagnostics([], self.path("diag.csv"))
		with open(self.path("diag.csv")) as f:
			self.assertEqual(f.read(), ",".join(DIAGNOSTICS_HEADER) + "\n")
		self.assertEqual(read_diagnostics(self.path("diag.csv")), [])

	def test_one_row_per_step(self):
		grid = GridSpec(2, 8, 2 * math.pi)
		params = make_params()
		Q0, u0 = random_state(grid, 1)
		memory = MemorySink()
		sink = CSVDiagnosticsSink(self.path("run.csv"))
		summary = Solver(StepConfig(params, TimeController.fixed(0.1)), grid).run(
			initial_state(Q0, u0, params), 0.5, [sink, memory]
		)
		with open(self.path("run.csv")) as f:
			rows = list(csv.reader(f))
		self.assertEqual(tuple(rows[0]), DIAGNOSTICS_HEADER)
		self.assertEqual(len(rows) - 1, summary.steps)

		# 17 significant digits reproduce every float exactly
		self.assertEqual(read_diagnostics(self.path("run.csv")), memory.records)

	def test_not_a_diagnostics_file(self):
		with open(self.path("other.csv"), "w") as f:
			f.write("a,b\n1,2\n")
		with self.assertRaises(SinkError):
			read_diagnostics(self.path("other.csv"))

	def test_unwritable_path_names_it(self):
		target = os.path.join(self.tmp, "missing", "diag.csv")
		with self.assertRaises(SinkError) as ctx:
			write_diagnostics([], target)
		self.assertEqual(ctx.exception.path, target)


class TestSnapshots(IOTestCase):
	def make_state(self, d=2, J=8):
		grid = GridSpec(d, J, 2 * math.pi)
		params = make_params(d)
		Q, u = random_state(grid, 9)
		state = initial_state(Q, u, params, t=0.375)
		state.step_index = 12
		return state

	def test_bit_exact_round_trip(self):
		for d in (2, 3):
			state = self.make_state(d)
			snap = snapshot_from_state(state)
			write_snapshot(snap, self.path(f"snap{d}"))
			back = read_snapshot(self.path(f"snap{d}.bin"))
			self.assertEqual(list(back.fields), list(snap.fields))
			for name, values in snap.fields.items():
				self.assertEqual(back.fields[name].tobytes(), np.asarray(values, dtype=float).tobytes(), name)
			self.assertEqual((back.time, back.step, back.d, back.J, back.L, back.s), (
				snap.time, snap.step, snap.d, snap.J, snap.L, snap.s
			))

	def test_x_index_fastest_on_disk(self):
		state = self.make_state()
		snap = snapshot_from_state(state)
		write_snapshot(snap, self.path("layout"))
		raw = np.fromfile(self.path("layout.bin"), dtype="<f8")
		u = snap.fields["u"]
		self.assertEqual(raw[0], u[0, 0])
		self.assertEqual(raw[1], u[1, 0])
		self.assertEqual(raw[8], u[0, 1])

	def test_header_contents(self):
		write_snapshot(snapshot_from_state(self.make_state()), self.path("hdr"))
		with open(self.path("hdr.hdr")) as f:
			header = dict(line.strip().split(" = ", 1) for line in f)
		self.assertEqual(header["byte_order"], "little")
		self.assertEqual(header["d"], "2")
		self.assertEqual(header["fields"], "u,q11,q12,lambda_max,director_angle")

	def test_restart_state(self):
		state = self.make_state()
		write_snapshot(snapshot_from_state(state), self.path("restart"))
		back = state_from_snapshot(read_snapshot(self.path("restart")))
		np.testing.assert_array_equal(back.Q.comps, state.Q.comps)
		np.testing.assert_array_equal(back.u, state.u)
		self.assertEqual((back.s, back.t, back.step_index), (state.s, state.t, state.step_index))
		self.assertEqual(back.Q.grid, state.Q.grid)

	def test_truncated_binary(self):
		write_snapshot(snapshot_from_state(self.make_state()), self.path("cut"))
		with open(self.path("cut.bin"), "r+b") as f:
			f.truncate(64)
		with self.assertRaises(SinkError):
			read_snapshot(self.path("cut"))

	def test_field_csv(self):
		snap = snapshot_from_state(self.make_state())
		export_field_csv(snap, "u", self.path("u.csv"))
		values = np.loadtxt(self.path("u.csv"), delimiter=",")
		np.testing.assert_array_equal(values, snap.fields["u"])
		with self.assertRaises(SinkError):
			export_field_csv(snap, "pressure", self.path("p.csv"))
		with self.assertRaises(SinkError):
			export_field_csv(snapshot_from_state(self.make_state(3)), "u", self.path("u3.csv"))

	def test_snapshot_cadence(self):
		grid = GridSpec(2, 8, 2 * math.pi)
		params = make_params()
		Q0, u0 = random_state(grid, 1)
		directory = self.path("snaps")
		Solver(StepConfig(params, TimeController.fixed(0.1)), grid).run(
			initial_state(Q0, u0, params), 0.5, [SnapshotSink(directory, every=2)]
		)
		names = sorted(name for name in os.listdir(directory) if name.endswith(".bin"))
		self.assertEqual(
			names, ["snap_000000.bin", "snap_000002.bin", "snap_000004.bin", "snap_000005.bin"]
		)
		final = read_snapshot(os.path.join(directory, "snap_000005"))
		self.assertAlmostEqual(final.time, 0.5, places=14)
