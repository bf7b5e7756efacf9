"""Two-impulse input shapers and the algebra on impulse trains.

An input shaper is a short train of positive impulses with unit total
amplitude.  Convolving a joint command with the train splits the motion
into staggered scaled copies whose vibration contributions cancel at the
tuned frequency: the second impulse, placed half a vibration period after
the first, excites the structure in counter-phase with what the first
impulse left ringing.  For an oscillator whose amplitude decays by a
factor k0 over that half period, the amplitudes 1/(1+k0) and k0/(1+k0)
make the cancellation exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import ParameterError

# impulses closer together than this merge into one when cascading
MERGE_TOL_S = 1e-9

_AMP_SUM_TOL = 1e-12


def k0_from_damping_ratio(zeta: float) -> float:
    """Amplitude ratio over one half period of a damped oscillator.

    For the standard second-order system with damping ratio zeta the
    envelope decays by exp(-zeta*pi/sqrt(1-zeta**2)) per half period of
    the damped oscillation, which is exactly the k0 a matched shaper
    should use.  zeta = 0 gives 1.0.
    """
    if not (isinstance(zeta, (int, float)) and math.isfinite(zeta)):
        raise ParameterError(f"damping ratio must be a finite number, got {zeta!r}")
    if not 0.0 <= zeta < 1.0:
        raise ParameterError(f"damping ratio must be in [0, 1), got {zeta}")
    return math.exp(-zeta * math.pi / math.sqrt(1.0 - zeta * zeta))


@dataclass(frozen=True)
class ShaperParams:
    """The two tunables of a two-impulse shaper.

    t0 is the inter-impulse delay in seconds, equal to half the vibration
    period of the mode being cancelled.  k0 is the amplitude decay of the
    structure over that delay; weakly damped structures have k0 close
    to 1.
    """

    t0: float
    k0: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.t0, (int, float)) and math.isfinite(self.t0)) or self.t0 <= 0:
            raise ParameterError(f"t0 must be a finite positive time, got {self.t0!r}")
        if not (isinstance(self.k0, (int, float)) and math.isfinite(self.k0)):
            raise ParameterError(f"k0 must be a finite number, got {self.k0!r}")
        if not 0.0 < self.k0 <= 1.0:
            raise ParameterError(f"k0 must lie in (0, 1], got {self.k0}")

    @classmethod
    def for_frequency(cls, freq_hz: float, k0: float = 1.0) -> "ShaperParams":
        """Half-period delay for a mode at freq_hz."""
        if not (isinstance(freq_hz, (int, float)) and freq_hz > 0):
            raise ParameterError(f"frequency must be positive, got {freq_hz!r}")
        return cls(t0=1.0 / (2.0 * freq_hz), k0=k0)


@dataclass(frozen=True)
class ImpulseSequence:
    """Ordered impulse train (amplitude, time) with unit amplitude sum.

    times are strictly increasing and start at 0; amplitudes are strictly
    positive and sum to 1 within 1e-12, so the train has unit DC gain and
    shaping never changes the final commanded position.
    """

    amplitudes: tuple
    times: tuple

    def __post_init__(self):
        amps = tuple(float(a) for a in self.amplitudes)
        times = tuple(float(t) for t in self.times)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "times", times)
        if len(amps) != len(times) or not amps:
            raise ParameterError("need equal, nonzero counts of amplitudes and times")
        if times[0] != 0.0:
            raise ParameterError(f"first impulse must be at t=0, got {times[0]}")
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise ParameterError("impulse times must be strictly increasing")
        if any(not (a > 0 and math.isfinite(a)) for a in amps):
            raise ParameterError("impulse amplitudes must be strictly positive")
        total = math.fsum(amps)
        if abs(total - 1.0) > _AMP_SUM_TOL:
            raise ParameterError(f"impulse amplitudes must sum to 1, got {total!r}")

    @classmethod
    def identity(cls) -> "ImpulseSequence":
        """Single unit impulse at t=0 (shaping with it is a no-op)."""
        return cls(amplitudes=(1.0,), times=(0.0,))

    def __len__(self):
        return len(self.amplitudes)

    def __iter__(self):
        return iter(zip(self.amplitudes, self.times))

    @property
    def total_delay(self) -> float:
        return self.times[-1]


def zv_from_params(params: ShaperParams) -> ImpulseSequence:
    """Two-impulse shaper from (t0, k0).

    Amplitudes are 1/(1+k0) at t=0 and k0/(1+k0) at t=t0.  With k0=1 this
    is the familiar pair of half-amplitude impulses half a period apart.
    """
    if not isinstance(params, ShaperParams):
        params = ShaperParams(*params)
    k2 = 1.0 / (1.0 + params.k0)
    k1 = params.k0 / (1.0 + params.k0)
    return ImpulseSequence(amplitudes=(k2, k1), times=(0.0, params.t0))


def cascade(a: ImpulseSequence, b: ImpulseSequence) -> ImpulseSequence:
    """Convolve two impulse trains.

    Every pairwise time sum appears with the product amplitude; times that
    coincide within MERGE_TOL_S collapse into a single impulse.  Unit
    amplitude sum is preserved by construction (product of two unit sums).
    """
    raw = sorted(
        (ta + tb, aa * ab)
        for aa, ta in a
        for ab, tb in b
    )
    times: list = []
    amps: list = []
    for t, amp in raw:
        if times and t - times[-1] <= MERGE_TOL_S:
            amps[-1] += amp
        else:
            times.append(t)
            amps.append(amp)
    return ImpulseSequence(amplitudes=tuple(amps), times=tuple(times))


def total_delay(seq: ImpulseSequence) -> float:
    """Time of the last impulse: how much shaping lengthens the motion."""
    return seq.total_delay


def frequency_response(seq: ImpulseSequence, f):
    """Magnitude and phase of the train at frequency f (Hz).

    H(f) = sum_j A_j * exp(-i*2*pi*f*t_j).  Accepts a scalar or an array
    of frequencies; returns (magnitude, phase_radians) with matching
    shape.
    """
    f_arr = np.asarray(f, dtype=np.float64)
    if np.any(f_arr < 0):
        raise ParameterError("frequency must be nonnegative")
    amps = np.asarray(seq.amplitudes)
    times = np.asarray(seq.times)
    h = np.sum(amps * np.exp(-2j * np.pi * f_arr[..., None] * times), axis=-1)
    mag = np.abs(h)
    phase = np.angle(h)
    if np.isscalar(f) or f_arr.ndim == 0:
        return float(mag), float(phase)
    return mag, phase


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled multi-channel command (positions or velocities).

    channels is a 2-D float array, one row per joint.  Values are degrees
    for position commands but nothing here depends on the unit.
    """

    sample_rate: float
    start_time: float
    channels: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (isinstance(self.sample_rate, (int, float)) and self.sample_rate > 0):
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate!r}")
        ch = np.array(self.channels, dtype=np.float64, ndmin=2)
        if ch.ndim != 2 or ch.shape[1] < 1:
            raise ParameterError("channels must be a nonempty 2-D array (channels x samples)")
        if not np.all(np.isfinite(ch)):
            raise ParameterError("trajectory samples must be finite")
        ch.flags.writeable = False
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "start_time", float(self.start_time))

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.n_samples) / self.sample_rate

    @property
    def end_time(self) -> float:
        return self.start_time + (self.n_samples - 1) / self.sample_rate

    def channel(self, i: int) -> np.ndarray:
        return self.channels[i]


def apply(seq: ImpulseSequence, traj: Trajectory) -> Trajectory:
    """Shape a trajectory by convolving every channel with the train.

    The input is treated as held at its first sample before start_time
    (the arm is parked there) and at its last sample afterwards.  Impulse
    times that fall between samples are realized by linear interpolation,
    so the notch stays tuned even when t0 is not a multiple of the sample
    period.  The output gains ceil(total_delay * sample_rate) samples so
    the delayed tail of the command is emitted rather than truncated.
    """
    if not isinstance(traj, Trajectory):
        raise ParameterError("apply expects a Trajectory")
    fs = traj.sample_rate
    delays = np.asarray(seq.times) * fs
    amps = np.asarray(seq.amplitudes)
    # guard against 20.000000000000004 turning into 21 extra samples
    n_extra = int(math.ceil(delays[-1] - 1e-9)) if delays[-1] > 0 else 0
    n_out = traj.n_samples + n_extra
    shaped = np.empty((traj.n_channels, n_out))
    for c in range(traj.n_channels):
        shaped[c] = _backend.shape_channel(traj.channels[c], amps, delays, n_out)
    return Trajectory(sample_rate=fs, start_time=traj.start_time, channels=shaped)
