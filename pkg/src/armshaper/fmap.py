"""Joint-space frequency maps: build, interpolate, extrapolate.

A map stores per-mode natural frequencies measured on a rectangular grid
of joint angles.  Queries at arbitrary poses use multilinear (bilinear
for two joints) interpolation, reproducing grid nodes exactly.  Poses
slightly outside the grid can be extrapolated by extending the boundary
cell's linear trend, flagged so callers can apply stricter policy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GridError, OutOfDomainError, ParameterError
from .shaper import ShaperParams

EXTRAPOLATION_FLOOR_HZ = 0.1


def as_pose(pose) -> tuple:
    """Normalize a pose to a tuple of finite floats."""
    try:
        out = tuple(float(q) for q in pose)
    except TypeError:
        raise ParameterError(f"pose must be a sequence of angles, got {pose!r}")
    if not out or any(not math.isfinite(q) for q in out):
        raise ParameterError(f"pose must contain finite angles, got {pose!r}")
    return out


@dataclass(frozen=True)
class FrequencyMap:
    """Per-mode natural frequencies over a rectangular joint grid.

    axes holds the grid angles per joint (strictly increasing, degrees);
    values has shape (modes, len(axes[0]), len(axes[1]), ...) in Hz.  k0
    is either a scalar applied everywhere or an array shaped like values,
    interpolated with the same weights as the frequencies.  metadata is
    free-form provenance carried through serialization untouched.
    """

    axes: tuple
    values: np.ndarray = field(repr=False)
    k0: object = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        axes = tuple(tuple(float(a) for a in ax) for ax in self.axes)
        if not axes:
            raise ParameterError("map needs at least one joint axis")
        for ax in axes:
            if len(ax) < 2:
                raise ParameterError("each axis needs at least 2 grid angles")
            if any(not b > a for a, b in zip(ax, ax[1:])):
                raise ParameterError("axis angles must be strictly increasing")
            if any(not math.isfinite(a) for a in ax):
                raise ParameterError("axis angles must be finite")
        vals = np.asarray(self.values, dtype=np.float64)
        expected = tuple(len(ax) for ax in axes)
        if vals.ndim != len(axes) + 1 or vals.shape[1:] != expected:
            raise ParameterError(
                f"values shape {vals.shape} does not match (modes, {expected})"
            )
        if vals.shape[0] < 1:
            raise ParameterError("map needs at least one mode")
        if not np.all(np.isfinite(vals)) or not np.all(vals > 0):
            raise ParameterError("frequencies must be finite and positive")
        for m in range(vals.shape[0] - 1):
            if not np.all(vals[m + 1] > vals[m]):
                raise ParameterError(
                    f"mode {m + 2} must exceed mode {m + 1} at every grid node"
                )
        vals = vals.copy()
        vals.flags.writeable = False
        if isinstance(self.k0, (int, float)):
            k0 = float(self.k0)
            if not 0.0 < k0 <= 1.0:
                raise ParameterError(f"k0 must lie in (0, 1], got {k0}")
        else:
            k0 = np.asarray(self.k0, dtype=np.float64)
            if k0.shape != vals.shape:
                raise ParameterError(
                    f"k0 grid shape {k0.shape} must match values shape {vals.shape}"
                )
            if not np.all((k0 > 0) & (k0 <= 1.0)):
                raise ParameterError("k0 grid entries must lie in (0, 1]")
            k0 = k0.copy()
            k0.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "k0", k0)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def modes(self) -> int:
        return self.values.shape[0]

    @property
    def n_joints(self) -> int:
        return len(self.axes)

    def contains(self, pose) -> bool:
        pose = self._check_pose(pose)
        return all(ax[0] <= q <= ax[-1] for ax, q in zip(self.axes, pose))

    def _check_pose(self, pose) -> tuple:
        pose = as_pose(pose)
        if len(pose) != self.n_joints:
            raise ParameterError(
                f"pose has {len(pose)} joints, map has {self.n_joints}"
            )
        return pose

    def _check_mode(self, mode: int) -> int:
        if not isinstance(mode, (int, np.integer)) or isinstance(mode, bool):
            raise ParameterError(f"mode index must be an integer, got {mode!r}")
        if not 0 <= mode < self.modes:
            raise ParameterError(
                f"mode index {mode} out of range for a {self.modes}-mode map"
            )
        return int(mode)


def build_map(measurements, metadata=None, k0=1.0) -> FrequencyMap:
    """Assemble a map from (pose, peaks) pairs covering a rectangular grid.

    The axes are inferred from the distinct angles seen per joint; every
    combination must be present exactly once.  Peaks may be ModePeak
    objects or bare frequencies; each node's list is sorted by frequency
    so mode m is the (m+1)-th lowest everywhere.
    """
    if not measurements:
        raise GridError("no measurements supplied")
    poses = [as_pose(p) for p, _ in measurements]
    dims = {len(p) for p in poses}
    if len(dims) != 1:
        raise ParameterError("all poses must have the same number of joints")
    n_joints = dims.pop()
    counts = {len(peaks) for _, peaks in measurements}
    if len(counts) != 1:
        raise ParameterError(
            f"inconsistent mode counts across measurements: {sorted(counts)}"
        )
    n_modes = counts.pop()
    if n_modes < 1:
        raise ParameterError("each measurement needs at least one mode peak")

    axes = tuple(tuple(sorted({p[j] for p in poses})) for j in range(n_joints))
    index_of = [{a: i for i, a in enumerate(ax)} for ax in axes]
    expected = set(itertools.product(*axes))
    seen = set()
    values = np.full((n_modes,) + tuple(len(ax) for ax in axes), np.nan)
    for pose, peaks in measurements:
        pose = as_pose(pose)
        if pose in seen:
            raise GridError(f"duplicate measurement at pose {pose}")
        seen.add(pose)
        freqs = sorted(getattr(pk, "frequency", pk) for pk in peaks)
        idx = tuple(index_of[j][pose[j]] for j in range(n_joints))
        for m in range(n_modes):
            values[(m,) + idx] = freqs[m]
    missing = sorted(expected - seen)
    if missing:
        listing = ", ".join(str(p) for p in missing)
        raise GridError(f"grid is missing {len(missing)} pose(s): {listing}")
    return FrequencyMap(axes=axes, values=values, k0=k0, metadata=metadata or {})


def _cell_coords(axis: Sequence[float], q: float):
    """Containing cell index and the normalized coordinate inside it.

    For q at a grid node the coordinate comes out exactly 0.0 or 1.0,
    which keeps node queries bit-exact through the lerp.  Outside the
    axis the coordinate runs past [0, 1] and the formula extrapolates the
    boundary cell linearly.
    """
    i = int(np.searchsorted(axis, q, side="right")) - 1
    i = min(max(i, 0), len(axis) - 2)
    t = (q - axis[i]) / (axis[i + 1] - axis[i])
    return i, t


def _multilinear(grid: np.ndarray, axes, pose):
    """Nested lerp of an N-D grid at a pose (tensor-product weights)."""
    coords = [_cell_coords(ax, q) for ax, q in zip(axes, pose)]
    block = grid[tuple(slice(i, i + 2) for i, _ in coords)]
    for _, t in coords:
        block = (1.0 - t) * block[0] + t * block[1]
    return float(block)


def interpolate(fmap: FrequencyMap, pose, mode: int) -> float:
    """Multilinear interpolation of one mode's frequency at a pose.

    The pose must lie inside the grid's bounding box; outside it an
    OutOfDomainError is raised so the caller can decide whether
    extrapolation is acceptable.
    """
    mode = fmap._check_mode(mode)
    pose = fmap._check_pose(pose)
    for j, (ax, q) in enumerate(zip(fmap.axes, pose)):
        if not ax[0] <= q <= ax[-1]:
            raise OutOfDomainError(
                f"joint {j + 1} angle {q} outside grid range [{ax[0]}, {ax[-1]}]"
            )
    return _multilinear(fmap.values[mode], fmap.axes, pose)


def extrapolate(fmap: FrequencyMap, pose, mode: int, max_cells: float = 1.0):
    """Linear extension of the boundary cell for poses just outside the grid.

    Returns (frequency_hz, flag) where flag is True when the pose was
    actually outside the box.  The overshoot is limited to max_cells
    boundary-cell widths per axis; beyond that the local-linearity
    assumption has no support and an OutOfDomainError is raised.  Results
    are floored at EXTRAPOLATION_FLOOR_HZ.
    """
    mode = fmap._check_mode(mode)
    pose = fmap._check_pose(pose)
    outside = False
    for j, (ax, q) in enumerate(zip(fmap.axes, pose)):
        if ax[0] <= q <= ax[-1]:
            continue
        outside = True
        if q < ax[0]:
            cell = ax[1] - ax[0]
            over = ax[0] - q
        else:
            cell = ax[-1] - ax[-2]
            over = q - ax[-1]
        if over > max_cells * cell * (1.0 + 1e-12):
            raise OutOfDomainError(
                f"joint {j + 1} angle {q} is {over:.3g} deg outside the grid, "
                f"more than {max_cells:g} boundary cell(s) ({max_cells * cell:.3g} deg)"
            )
    value = _multilinear(fmap.values[mode], fmap.axes, pose)
    return max(value, EXTRAPOLATION_FLOOR_HZ), outside


def interpolate_k0(fmap: FrequencyMap, pose, mode: int) -> float:
    """The map's k0 at a pose: the scalar, or the grid interpolated."""
    mode = fmap._check_mode(mode)
    if isinstance(fmap.k0, float):
        return fmap.k0
    pose = fmap._check_pose(pose)
    val = _multilinear(fmap.k0[mode], fmap.axes, pose)
    return min(max(val, 1e-6), 1.0)


def shaper_params_at(
    fmap: FrequencyMap,
    pose,
    mode: int,
    k0_policy=None,
    allow_extrapolation: bool = False,
) -> ShaperParams:
    """Shaper tunables for one mode at a target pose.

    t0 is half the period of the interpolated frequency.  k0 comes from
    k0_policy when given (a fixed number), otherwise from the map's own
    k0 (scalar or interpolated grid).
    """
    try:
        f = interpolate(fmap, pose, mode)
    except OutOfDomainError:
        if not allow_extrapolation:
            raise
        f, _ = extrapolate(fmap, pose, mode)
    if k0_policy is None:
        k0 = interpolate_k0(fmap, pose, mode)
    else:
        k0 = float(k0_policy)
    return ShaperParams(t0=1.0 / (2.0 * f), k0=k0)
