"""Ground-truth plant: a configuration-dependent multi-mode oscillator.

The arm stand-in is a sum of lightly damped second-order sections.  Each
mode receives a weighted combination of the commanded joint angles, rings
at a frequency looked up at the motion's end pose (quasi-static: the
plant is LTI for the duration of one motion), and contributes its state
to the tip displacement through a static gain.  Sections are advanced
with the exact discrete update for a zero-order-hold input, so there is
no integrator error to widen test tolerances, and the tip acceleration
comes from the modal states analytically rather than by differencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .errors import (
    ConfigurationError,
    InsufficientDataError,
    ParameterError,
    ReductionUndefinedError,
)
from .fmap import FrequencyMap, as_pose, extrapolate, interpolate
from .ident import AccelTrace
from .shaper import Trajectory

#: samples per period of the fastest mode below which simulate() refuses to run
MIN_SAMPLES_PER_PERIOD = 10.0


@dataclass(frozen=True)
class AffineFrequency:
    """Natural frequency as an affine function of the joint angles.

    f(pose) = base + sum_j slopes[j] * (pose[j] - anchor[j]), in Hz.
    """

    base: float
    slopes: tuple
    anchor: tuple

    def __post_init__(self):
        object.__setattr__(self, "slopes", tuple(float(s) for s in self.slopes))
        object.__setattr__(self, "anchor", tuple(float(a) for a in self.anchor))
        if len(self.slopes) != len(self.anchor):
            raise ParameterError("slopes and anchor must have the same length")
        if not self.base > 0:
            raise ParameterError(f"base frequency must be positive, got {self.base!r}")

    def __call__(self, pose) -> float:
        pose = as_pose(pose)
        if len(pose) != len(self.slopes):
            raise ParameterError(
                f"pose has {len(pose)} joints, frequency function expects {len(self.slopes)}"
            )
        return self.base + sum(s * (q - a) for s, q, a in zip(self.slopes, pose, self.anchor))


@dataclass(frozen=True)
class MapFrequency:
    """Natural frequency looked up in a tabulated FrequencyMap."""

    fmap: FrequencyMap
    mode: int
    allow_extrapolation: bool = False

    def __call__(self, pose) -> float:
        if self.allow_extrapolation:
            f, _ = extrapolate(self.fmap, pose, self.mode)
            return f
        return interpolate(self.fmap, pose, self.mode)


@dataclass(frozen=True)
class ModeSpec:
    """One vibration mode of the plant.

    freq is a constant (Hz) or a callable pose -> Hz (AffineFrequency and
    MapFrequency are such callables).  gain converts commanded degrees to
    millimetres of tip motion contributed by this mode.  weights couples
    the joints into the mode's scalar input; None means every joint
    contributes with unit weight.
    """

    freq: object
    zeta: float = 0.01
    gain: float = 1.0
    weights: tuple | None = None

    def __post_init__(self):
        if not (isinstance(self.zeta, (int, float)) and 0.0 <= self.zeta < 0.2):
            raise ParameterError(f"zeta must lie in [0, 0.2), got {self.zeta!r}")
        if not (isinstance(self.gain, (int, float)) and self.gain > 0):
            raise ParameterError(f"gain must be positive, got {self.gain!r}")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if not w:
                raise ParameterError("weights must be a nonempty tuple or None")
            object.__setattr__(self, "weights", w)
        if isinstance(self.freq, (int, float)) and not self.freq > 0:
            raise ParameterError(f"constant frequency must be positive, got {self.freq!r}")

    def frequency_at(self, pose) -> float:
        f = self.freq(pose) if callable(self.freq) else float(self.freq)
        if not (math.isfinite(f) and f > 0):
            raise ConfigurationError(f"mode frequency at pose {tuple(pose)} is {f!r}")
        return f

    def input_weights(self, n_joints: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(n_joints)
        if len(self.weights) != n_joints:
            raise ConfigurationError(
                f"mode has {len(self.weights)} joint weights, command has {n_joints} joints"
            )
        return np.asarray(self.weights)


@dataclass(frozen=True)
class SimConfig:
    """Plant description plus measurement-noise model.

    noise_std is the standard deviation of white Gaussian noise added to
    the acceleration channel only (displacement is returned clean, like a
    laser-tracker reading).  None picks 1% of the peak noise-free
    acceleration of each simulation; 0 disables noise entirely.
    """

    modes: tuple
    sample_rate: float = 100.0
    noise_std: float | None = None
    seed: int = 0

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes or not all(isinstance(m, ModeSpec) for m in modes):
            raise ParameterError("modes must be a nonempty tuple of ModeSpec")
        object.__setattr__(self, "modes", modes)
        if not (isinstance(self.sample_rate, (int, float)) and self.sample_rate > 0):
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate!r}")
        if self.noise_std is not None and not self.noise_std >= 0:
            raise ParameterError(f"noise_std must be >= 0 or None, got {self.noise_std!r}")


@dataclass(frozen=True)
class SimResult:
    """Traces produced by one simulated motion.

    command_end_time marks where the commanded trajectory stopped moving
    (for a shaped command this already includes the shaper delay, because
    shaping lengthened the trajectory before it reached the plant).
    mode_freqs records the per-mode frequencies frozen at the end pose.
    """

    tip_displacement: Trajectory
    tip_acceleration: AccelTrace
    command_end_time: float
    mode_freqs: tuple = ()


def step_trajectory(
    start_pose,
    end_pose,
    sample_rate: float = 100.0,
    step_time: float = 0.5,
    end_time: float = 1.0,
) -> Trajectory:
    """Joint command that jumps from start_pose to end_pose at step_time.

    The step happens strictly inside the trajectory so the plant, which
    starts at rest at the first commanded value, actually gets excited.
    """
    start_pose = as_pose(start_pose)
    end_pose = as_pose(end_pose)
    if len(start_pose) != len(end_pose):
        raise ParameterError("start and end poses must have the same joint count")
    if not 0.0 < step_time < end_time:
        raise ParameterError("need 0 < step_time < end_time")
    n = int(round(end_time * sample_rate)) + 1
    t = np.arange(n) / sample_rate
    channels = np.empty((len(start_pose), n))
    for j, (a, b) in enumerate(zip(start_pose, end_pose)):
        channels[j] = np.where(t < step_time, a, b)
    return Trajectory(sample_rate=sample_rate, start_time=0.0, channels=channels)


def simulate(config: SimConfig, command: Trajectory, hold_time: float = 10.0) -> SimResult:
    """Run the plant over a command and the hold that follows it.

    The command is extended by hold_time seconds at its final value so the
    residual ringdown is observable.  Frequencies are evaluated once, at
    the command's final pose.  Determinism: equal (config, command,
    hold_time) give bit-identical results.
    """
    if not isinstance(command, Trajectory):
        raise ParameterError("simulate expects a Trajectory command")
    if hold_time < 0:
        raise ParameterError("hold_time must be >= 0")
    fs = config.sample_rate
    if not math.isclose(command.sample_rate, fs, rel_tol=1e-9):
        raise ConfigurationError(
            f"command sample rate {command.sample_rate} differs from plant rate {fs}"
        )
    fs = command.sample_rate
    end_pose = tuple(command.channels[:, -1])
    freqs = tuple(m.frequency_at(end_pose) for m in config.modes)
    worst = max(freqs)
    if fs < MIN_SAMPLES_PER_PERIOD * worst:
        raise ConfigurationError(
            f"sample rate {fs} Hz is below {MIN_SAMPLES_PER_PERIOD:g} samples per period "
            f"of the {worst:.3g} Hz mode"
        )

    n_hold = int(round(hold_time * fs))
    u_joints = np.hstack(
        [command.channels, np.repeat(command.channels[:, -1:], n_hold, axis=1)]
    )
    n = u_joints.shape[1]
    dt = 1.0 / fs

    disp = np.zeros(n)
    acc = np.zeros(n)
    for spec, f in zip(config.modes, freqs):
        w = spec.input_weights(command.n_channels)
        u = w @ u_joints
        omega = 2.0 * math.pi * f
        x, v = _backend.modal_response(u, dt, omega, spec.zeta)
        disp += spec.gain * x
        acc += spec.gain * (omega * omega * (u - x) - 2.0 * spec.zeta * omega * v)

    if config.noise_std is None:
        std = 0.01 * float(np.max(np.abs(acc))) if n else 0.0
    else:
        std = float(config.noise_std)
    if std > 0:
        rng = np.random.default_rng(config.seed)
        acc = acc + rng.normal(0.0, std, n)

    command_end = command.end_time
    return SimResult(
        tip_displacement=Trajectory(
            sample_rate=fs, start_time=command.start_time, channels=disp[None, :]
        ),
        tip_acceleration=AccelTrace(
            sample_rate=fs,
            samples=acc,
            motion_end_time=command_end,
            start_time=command.start_time,
        ),
        command_end_time=command_end,
        mode_freqs=freqs,
    )


def residual_amplitude(result: SimResult, settle_guard: float = 0.0) -> float:
    """Peak-to-peak tip displacement after the command (plus guard) ends.

    Requires the trace to extend at least 3 periods of the slowest mode
    past the start of the window, so the swing is actually observable.
    """
    if settle_guard < 0:
        raise ParameterError("settle_guard must be >= 0")
    traj = result.tip_displacement
    t_start = result.command_end_time + settle_guard
    window = traj.end_time - t_start
    if result.mode_freqs:
        needed = 3.0 / min(result.mode_freqs)
        if window < needed:
            raise InsufficientDataError(
                f"only {window:.2f} s of trace after the window start, need "
                f"{needed:.2f} s (3 periods of the slowest mode)"
            )
    elif window <= 0:
        raise InsufficientDataError("no trace left after command_end_time + settle_guard")
    i0 = max(int(math.ceil((t_start - traj.start_time) * traj.sample_rate - 1e-9)), 0)
    seg = traj.channels[0, i0:]
    return float(seg.max() - seg.min())


@dataclass(frozen=True)
class ReductionReport:
    amp_without: float
    amp_with: float
    reduction_percent: float


def reduction_report(
    unshaped: SimResult, shaped: SimResult, settle_guard: float = 0.0
) -> ReductionReport:
    """Table-style comparison of residual amplitude with and without shaping."""
    amp_without = residual_amplitude(unshaped, settle_guard)
    amp_with = residual_amplitude(shaped, settle_guard)
    if amp_without == 0.0:
        raise ReductionUndefinedError("unshaped residual is zero; reduction undefined")
    reduction = 100.0 * (1.0 - amp_with / amp_without)
    return ReductionReport(
        amp_without=amp_without, amp_with=amp_with, reduction_percent=reduction
    )


def synth_campaign(
    config: SimConfig,
    grid,
    step_from,
    step_time: float = 0.5,
    move_time: float = 1.0,
    hold_time: float = 16.0,
):
    """Unshaped step motions to every grid pose, as acceleration traces.

    The synthetic analogue of a measurement campaign: park at step_from,
    step to the pose, record the ringdown.  Returns a list of
    (pose, AccelTrace) with motion_end_time set.  Each pose's noise uses
    a seed derived from config.seed and the pose's position in the list,
    so traces are independent but reproducible.

    Watch the mode coupling weights: a motion with w . (pose - step_from)
    = 0 leaves that mode silent and the pose unidentifiable.
    """
    out = []
    for i, pose in enumerate(grid):
        pose = as_pose(pose)
        cfg = replace(config, seed=config.seed * 1000003 + i)
        cmd = step_trajectory(
            step_from,
            pose,
            sample_rate=config.sample_rate,
            step_time=step_time,
            end_time=move_time,
        )
        result = simulate(cfg, cmd, hold_time=hold_time)
        out.append((pose, result.tip_acceleration))
    return out


def default_sim_config(seed: int = 0, noise_std: float | None = None) -> SimConfig:
    """The stock two-mode synthetic arm used by tests and the CLI.

    Mode frequencies are affine in the joint angles, anchored at
    (45 deg, 60 deg) -> 1.9 and 3.8 Hz with the second mode exactly twice
    the first everywhere, spanning roughly 1.6-2.3 Hz over [0, 90]^2.
    """
    anchor = (45.0, 60.0)
    f1 = AffineFrequency(base=1.9, slopes=(0.004, -0.003), anchor=anchor)
    f2 = AffineFrequency(base=3.8, slopes=(0.008, -0.006), anchor=anchor)
    return SimConfig(
        modes=(
            ModeSpec(freq=f1, zeta=0.01, gain=1.5),
            ModeSpec(freq=f2, zeta=0.01, gain=0.25),
        ),
        sample_rate=100.0,
        noise_std=noise_std,
        seed=seed,
    )
