# Copyright (c) 2026, Smectica Contributors
# MIT License. See license.txt

"""
Diagnostics CSV, binary snapshots and the run sinks that produce them.

A snapshot ``<base>`` is two files: ``<base>.bin`` holds the named fields one after another as
little-endian float64 with the x index fastest, and ``<base>.hdr`` is a ``key = value`` text
header describing them.
"""

import csv
import logging
import os
from dataclasses import astuple, dataclass, field, fields

import numpy as np

from smectica import qtensor
from smectica.exceptions import SinkError
from smectica.grid import GridSpec
from smectica.qtensor import COMPONENT_NAMES, QField
from smectica.stepper import Sink, SolverState, StepDiagnostics
from smectica.utils import throw

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT = "smectica-snapshot 1"


@dataclass
class DiagnosticsRecord:
	step: int
	t: float
	tau: float
	sup_F_Q: float
	max_u: float
	min_u: float
	E_modified: float
	E_original: float
	e1h: float
	s: float
	g: float
	xi: float
	R: float

	@classmethod
	def from_diagnostics(cls, diag: StepDiagnostics) -> "DiagnosticsRecord":
		return cls(
			step=diag.step,
			t=diag.t,
			tau=diag.tau_used,
			sup_F_Q=diag.sup_F,
			max_u=diag.max_u,
			min_u=diag.min_u,
			E_modified=diag.E_modified,
			E_original=diag.E_original,
			e1h=diag.e1h,
			s=diag.s,
			g=diag.g,
			xi=diag.xi,
			R=diag.R,
		)

	def as_row(self) -> list[str]:
		return [str(self.step)] + [format(value, ".17g") for value in astuple(self)[1:]]


DIAGNOSTICS_HEADER = tuple(f.name for f in fields(DiagnosticsRecord))


def _open(path, mode="w"):
	try:
		return open(path, mode, newline="", encoding="utf-8")
	except OSError as e:
		throw(f"cannot open {path}: {e.strerror}", SinkError, path=str(path))


def write_diagnostics(records, path):
	with _open(path) as f:
		writer = csv.writer(f, lineterminator="\n")
		writer.writerow(DIAGNOSTICS_HEADER)
		for record in records:
			writer.writerow(record.as_row())


def read_diagnostics(path) -> list[DiagnosticsRecord]:
	with _open(path, "r") as f:
		reader = csv.reader(f)
		header = next(reader, None)
		if tuple(header or ()) != DIAGNOSTICS_HEADER:
			throw(f"{path} is not a diagnostics file", SinkError, path=str(path))
		return [DiagnosticsRecord(int(row[0]), *(float(v) for v in row[1:])) for row in reader]


class MemorySink(Sink):
	def __init__(self):
		self.records = []
		self.diagnostics = []

	def emit(self, state, diag):
		self.diagnostics.append(diag)
		self.records.append(DiagnosticsRecord.from_diagnostics(diag))


class CSVDiagnosticsSink(Sink):
	"""Streams one CSV row per completed step."""

	def __init__(self, path):
		self.path = path
		self._file = None
		self._writer = None

	def begin(self, state, params):
		self._file = _open(self.path)
		self._writer = csv.writer(self._file, lineterminator="\n")
		self._writer.writerow(DIAGNOSTICS_HEADER)

	def emit(self, state, diag):
		try:
			self._writer.writerow(DiagnosticsRecord.from_diagnostics(diag).as_row())
		except OSError as e:
			throw(f"cannot write {self.path}: {e.strerror}", SinkError, path=str(self.path))

	def close(self):
		if self._file is not None:
			self._file.close()
			self._file = None


@dataclass(eq=False)
class Snapshot:
	time: float
	step: int
	d: int
	J: int
	L: float
	s: float
	fields: dict = field(default_factory=dict)

	@property
	def grid(self) -> GridSpec:
		return GridSpec(self.d, self.J, self.L)


def snapshot_from_state(state: SolverState) -> Snapshot:
	Q = state.Q
	grid = Q.grid
	values = {"u": np.asarray(state.u, dtype=float)}
	for name, comp in zip(COMPONENT_NAMES[grid.d], Q.comps, strict=True):
		values[name] = comp
	values["lambda_max"] = qtensor.largest_eigenvalue(Q)
	if grid.d == 2:
		values["director_angle"] = qtensor.director_angle(Q)
	return Snapshot(state.t, state.step_index, grid.d, grid.J, grid.L, state.s, values)


def _paths(path):
	base = os.fspath(path)
	for ext in (".bin", ".hdr"):
		if base.endswith(ext):
			base = base[: -len(ext)]
	return base + ".bin", base + ".hdr"


def write_snapshot(snap: Snapshot, path):
	bin_path, hdr_path = _paths(path)
	shape = (snap.J,) * snap.d
	header = {
		"format": SNAPSHOT_FORMAT,
		"byte_order": "little",
		"dtype": "float64",
		"layout": "x-fastest",
		"d": snap.d,
		"J": snap.J,
		"L": repr(float(snap.L)),
		"time": repr(float(snap.time)),
		"step": snap.step,
		"s": repr(float(snap.s)),
		"fields": ",".join(snap.fields),
	}
	try:
		with open(bin_path, "wb") as f:
			for name, values in snap.fields.items():
				values = np.asarray(values, dtype=float)
				if values.shape != shape:
					throw(f"snapshot field {name!r} has shape {values.shape}, expected {shape}", SinkError)
				f.write(values.astype("<f8").tobytes(order="F"))
		with open(hdr_path, "w", encoding="utf-8") as f:
			f.writelines(f"{key} = {value}\n" for key, value in header.items())
	except OSError as e:
		throw(f"cannot write snapshot {bin_path}: {e.strerror}", SinkError, path=bin_path)
	logger.info("snapshot written: %s (t=%.6g)", bin_path, snap.time)


def read_snapshot(path) -> Snapshot:
	bin_path, hdr_path = _paths(path)
	try:
		with open(hdr_path, encoding="utf-8") as f:
			header = dict(
				(part.strip() for part in line.split("=", 1)) for line in f if "=" in line
			)
		with open(bin_path, "rb") as f:
			raw = f.read()
	except OSError as e:
		throw(f"cannot read snapshot {bin_path}: {e.strerror}", SinkError, path=bin_path)
	if header.get("format") != SNAPSHOT_FORMAT or header.get("byte_order") != "little":
		throw(f"{hdr_path} is not a little-endian smectica snapshot header", SinkError, path=hdr_path)

	d, J = int(header["d"]), int(header["J"])
	names = [name for name in header["fields"].split(",") if name]
	shape = (J,) * d
	size = J**d
	data = np.frombuffer(raw, dtype="<f8")
	if data.size != size * len(names):
		throw(f"{bin_path} holds {data.size} values, expected {size * len(names)}", SinkError, path=bin_path)
	values = {
		name: data[i * size : (i + 1) * size].reshape(shape, order="F").astype(float)
		for i, name in enumerate(names)
	}
	return Snapshot(
		time=float(header["time"]),
		step=int(header["step"]),
		d=d,
		J=J,
		L=float(header["L"]),
		s=float(header["s"]),
		fields=values,
	)


def state_from_snapshot(snap: Snapshot) -> SolverState:
	"""Rebuild (Q, u, s, t) for a restart; cached energies are recomputed on first use."""
	grid = snap.grid
	missing = [name for name in ("u",) + COMPONENT_NAMES[grid.d] if name not in snap.fields]
	if missing:
		throw(f"snapshot lacks field(s) {', '.join(missing)}", SinkError)
	Q = QField(grid, np.stack([snap.fields[name] for name in COMPONENT_NAMES[grid.d]]))
	return SolverState(Q, np.array(snap.fields["u"]), snap.s, snap.time, snap.step)


def export_field_csv(snap: Snapshot, name: str, path):
	"""Plain CSV of one 2D field: row p holds the samples at x_p, column q those at y_q."""
	if snap.d != 2:
		throw("CSV export is only available for 2D snapshots", SinkError)
	if name not in snap.fields:
		throw(f"snapshot has no field {name!r}", SinkError)
	with _open(path) as f:
		writer = csv.writer(f, lineterminator="\n")
		for row in snap.fields[name]:
			writer.writerow(format(v, ".17g") for v in row)


class SnapshotSink(Sink):
	"""Writes ``snap_<step>`` every ``every`` steps (0 keeps only the first and last)."""

	def __init__(self, directory, every: int = 0):
		self.directory = directory
		self.every = every
		self.last_state = None
		self.last_written = None

	def _write(self, state):
		path = os.path.join(self.directory, f"snap_{state.step_index:06d}")
		write_snapshot(snapshot_from_state(state), path)
		self.last_written = state.step_index

	def begin(self, state, params):
		try:
			os.makedirs(self.directory, exist_ok=True)
		except OSError as e:
			throw(f"cannot create {self.directory}: {e.strerror}", SinkError, path=str(self.directory))
		self.last_state = state
		self._write(state)

	def emit(self, state, diag):
		self.last_state = state
		if self.every and state.step_index % self.every == 0:
			self._write(state)

	def close(self):
		if self.last_state is not None and self.last_written != self.last_state.step_index:
			self._write(self.last_state)
