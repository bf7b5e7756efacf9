"""Plain-text serialization: trace CSV, trajectory CSV, map JSON, reports.

All numeric text uses Python's shortest round-trip float repr, so a
write/read/write cycle is byte-identical and full precision survives.
Every reader raises ParameterError on malformed input; the CLI turns
that into exit code 1.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fmap import FrequencyMap
from .ident import AccelTrace, FrequencySpectrum
from .shaper import Trajectory

MAP_FORMAT_VERSION = 1

# relative wobble allowed between time steps before a file is rejected
_STEP_RTOL = 1e-6


def _fmt(x) -> str:
    return repr(float(x))


def _open_for_write(path_or_file):
    if hasattr(path_or_file, "write"):
        return path_or_file, False
    return open(path_or_file, "w", newline=""), True


def _open_for_read(path_or_file):
    if hasattr(path_or_file, "read"):
        return path_or_file, False
    return open(path_or_file, "r", newline=""), True


def _uniform_rate(times: np.ndarray, what: str) -> float:
    if times.shape[0] < 2:
        raise ParameterError(f"{what} needs at least 2 samples")
    steps = np.diff(times)
    dt = (times[-1] - times[0]) / (times.shape[0] - 1)
    if dt <= 0 or np.any(np.abs(steps - dt) > _STEP_RTOL * abs(dt)):
        raise ParameterError(f"{what} requires uniformly increasing time steps")
    return 1.0 / dt


def write_trace(path_or_file, trace: AccelTrace) -> None:
    """Trace CSV: a motion-end comment, then time_s,accel rows."""
    fh, close = _open_for_write(path_or_file)
    try:
        fh.write(f"# motion_end_s={_fmt(trace.motion_end_time)}\n")
        fh.write("time_s,accel\n")
        for t, a in zip(trace.times, trace.samples):
            fh.write(f"{_fmt(t)},{_fmt(a)}\n")
    finally:
        if close:
            fh.close()


def read_trace(path_or_file, motion_end: float | None = None) -> AccelTrace:
    """Parse a trace CSV.

    The motion end time comes from the motion_end argument when given,
    else from a '# motion_end_s=<v>' comment in the file; having neither
    is an error because the residual window would be undefined.
    """
    fh, close = _open_for_read(path_or_file)
    try:
        file_end, header, rows = _read_csv_body(fh, expected_cols=2, what="trace")
    finally:
        if close:
            fh.close()
    if header != ["time_s", "accel"]:
        raise ParameterError(f"trace header must be 'time_s,accel', got {header!r}")
    if motion_end is None:
        motion_end = file_end
    if motion_end is None:
        raise ParameterError(
            "no motion end time: pass one explicitly or add a '# motion_end_s=' comment"
        )
    times = np.array([r[0] for r in rows])
    fs = _uniform_rate(times, "trace")
    return AccelTrace(
        sample_rate=fs,
        samples=np.array([r[1] for r in rows]),
        motion_end_time=float(motion_end),
        start_time=float(times[0]),
    )


def _read_csv_body(fh, expected_cols, what):
    """Shared comment/header/row parsing for the two time-series formats.

    expected_cols may be None to accept any consistent column count >= 2.
    Returns (motion_end_comment_or_None, header, float rows).
    """
    motion_end = None
    header = None
    rows = []
    for lineno, line in enumerate(fh, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("motion_end_s="):
                try:
                    motion_end = float(body.split("=", 1)[1])
                except ValueError:
                    raise ParameterError(
                        f"{what} line {lineno}: bad motion_end_s comment {stripped!r}"
                    )
            continue
        cells = next(csv.reader([line]))
        if header is None:
            header = [c.strip() for c in cells]
            if expected_cols is not None and len(header) != expected_cols:
                raise ParameterError(
                    f"{what} header has {len(header)} columns, expected {expected_cols}"
                )
            if len(header) < 2:
                raise ParameterError(f"{what} header needs at least 2 columns")
            continue
        if len(cells) != len(header):
            raise ParameterError(
                f"{what} line {lineno}: {len(cells)} cells, header has {len(header)}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ParameterError(f"{what} line {lineno}: non-numeric cell in {line!r}")
    if header is None or len(rows) < 2:
        raise ParameterError(f"{what} file has no usable data rows")
    return motion_end, header, rows


def write_trajectory(path_or_file, traj: Trajectory) -> None:
    """Trajectory CSV: time_s,joint1_deg,joint2_deg,... rows."""
    fh, close = _open_for_write(path_or_file)
    try:
        names = ",".join(f"joint{i + 1}_deg" for i in range(traj.n_channels))
        fh.write(f"time_s,{names}\n")
        cols = traj.channels
        for k, t in enumerate(traj.times):
            vals = ",".join(_fmt(cols[c, k]) for c in range(traj.n_channels))
            fh.write(f"{_fmt(t)},{vals}\n")
    finally:
        if close:
            fh.close()


def read_trajectory(path_or_file) -> Trajectory:
    fh, close = _open_for_read(path_or_file)
    try:
        _, header, rows = _read_csv_body(fh, expected_cols=None, what="trajectory")
    finally:
        if close:
            fh.close()
    if header[0] != "time_s":
        raise ParameterError(f"trajectory first column must be time_s, got {header[0]!r}")
    data = np.asarray(rows)
    times = data[:, 0]
    fs = _uniform_rate(times, "trajectory")
    return Trajectory(sample_rate=fs, start_time=float(times[0]), channels=data[:, 1:].T)


def write_map(path_or_file, fmap: FrequencyMap) -> None:
    """Frequency map as indented, key-sorted JSON (stable bytes)."""
    doc = {
        "version": MAP_FORMAT_VERSION,
        "joint_axes": [list(ax) for ax in fmap.axes],
        "modes": fmap.modes,
        "values": [fmap.values[m].ravel(order="C").tolist() for m in range(fmap.modes)],
        "k0": fmap.k0
        if isinstance(fmap.k0, float)
        else [np.asarray(fmap.k0)[m].ravel(order="C").tolist() for m in range(fmap.modes)],
        "metadata": dict(fmap.metadata),
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    fh, close = _open_for_write(path_or_file)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def read_map(path_or_file) -> FrequencyMap:
    fh, close = _open_for_read(path_or_file)
    try:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParameterError(f"map file is not valid JSON: {e}")
    finally:
        if close:
            fh.close()
    if not isinstance(doc, dict):
        raise ParameterError("map document must be a JSON object")
    version = doc.get("version")
    if version != MAP_FORMAT_VERSION:
        raise ParameterError(
            f"unsupported map format version {version!r}, expected {MAP_FORMAT_VERSION}"
        )
    try:
        axes = tuple(tuple(float(a) for a in ax) for ax in doc["joint_axes"])
        modes = int(doc["modes"])
        shape = tuple(len(ax) for ax in axes)
        values = np.array(
            [np.asarray(doc["values"][m], dtype=np.float64).reshape(shape) for m in range(modes)]
        )
        raw_k0 = doc.get("k0", 1.0)
        if isinstance(raw_k0, (int, float)):
            k0 = float(raw_k0)
        else:
            k0 = np.array(
                [np.asarray(raw_k0[m], dtype=np.float64).reshape(shape) for m in range(modes)]
            )
        metadata = doc.get("metadata", {})
        if not isinstance(metadata, dict):
            raise ParameterError("map metadata must be a JSON object")
    except ParameterError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise ParameterError(f"map document is malformed: {e}")
    return FrequencyMap(axes=axes, values=values, k0=k0, metadata=metadata)


@dataclass(frozen=True)
class ReportRow:
    """One verification line: amplitudes with/without shaping at a pose."""

    label: str
    pose: tuple
    amp_without: float
    amp_with: float
    reduction_percent: float

    def __post_init__(self):
        object.__setattr__(self, "pose", tuple(float(q) for q in self.pose))
        if self.amp_without > 0:
            implied = 100.0 * (1.0 - self.amp_with / self.amp_without)
            if abs(implied - self.reduction_percent) > 0.1:
                raise ParameterError(
                    f"reduction {self.reduction_percent:.3f}% inconsistent with amplitudes "
                    f"(implies {implied:.3f}%)"
                )


def write_report(path_or_file, rows) -> None:
    """Verification report CSV, one row per position."""
    n_joints = len(rows[0].pose) if rows else 2
    fh, close = _open_for_write(path_or_file)
    try:
        joints = ",".join(f"joint{i + 1}_deg" for i in range(n_joints))
        fh.write(f"label,{joints},amp_without_mm,amp_with_mm,reduction_pct\n")
        for r in rows:
            pose = ",".join(_fmt(q) for q in r.pose)
            fh.write(
                f"{r.label},{pose},{_fmt(r.amp_without)},{_fmt(r.amp_with)},"
                f"{_fmt(r.reduction_percent)}\n"
            )
    finally:
        if close:
            fh.close()


def write_spectrum(path_or_file, spec: FrequencySpectrum) -> None:
    fh, close = _open_for_write(path_or_file)
    try:
        fh.write("frequency_hz,magnitude\n")
        for f, m in zip(spec.frequencies, spec.magnitudes):
            fh.write(f"{_fmt(f)},{_fmt(m)}\n")
    finally:
        if close:
            fh.close()


def write_bode(path_or_file, freqs, mags_db, phases_deg) -> None:
    fh, close = _open_for_write(path_or_file)
    try:
        fh.write("frequency_hz,magnitude_db,phase_deg\n")
        for f, m, p in zip(freqs, mags_db, phases_deg):
            fh.write(f"{_fmt(f)},{_fmt(m)},{_fmt(p)}\n")
    finally:
        if close:
            fh.close()


def dumps_csv(writer_fn, *args) -> str:
    """Run one of the write_* helpers into a string (for --csv output)."""
    buf = _io.StringIO()
    writer_fn(buf, *args)
    return buf.getvalue()
