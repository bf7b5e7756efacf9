"""Modal identification from measured tip acceleration.

The chain is: slice the residual window (everything after the commanded
motion ends), remove its mean, take a Hann-windowed zero-padded magnitude
spectrum, pick spectral peaks with sub-bin parabolic refinement, and
optionally estimate the per-half-period amplitude decay k0 from the
band-isolated ringdown.  Units of the acceleration samples are arbitrary;
only relative changes matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import (
    EstimationError,
    InsufficientDataError,
    NoModesFoundError,
    ParameterError,
)


@dataclass(frozen=True)
class AccelTrace:
    """Uniformly sampled acceleration with a motion-end marker.

    motion_end_time separates the commanded move from the free ringdown;
    everything at or after it is residual vibration.
    """

    sample_rate: float
    samples: np.ndarray = field(repr=False)
    motion_end_time: float
    start_time: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.sample_rate, (int, float)) and self.sample_rate > 0):
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate!r}")
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] < 2:
            raise ParameterError("samples must be a 1-D array with at least 2 entries")
        if not np.all(np.isfinite(x)):
            raise ParameterError("acceleration samples must be finite")
        x = x.copy()
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "start_time", float(self.start_time))
        object.__setattr__(self, "motion_end_time", float(self.motion_end_time))
        end = self.start_time + (x.shape[0] - 1) / self.sample_rate
        if not self.start_time <= self.motion_end_time <= end:
            raise ParameterError(
                f"motion_end_time {self.motion_end_time} outside trace span "
                f"[{self.start_time}, {end}]"
            )
        if x.shape[0] - self._residual_start_index() < 2:
            raise ParameterError("need at least 2 samples after motion_end_time")

    def _residual_start_index(self) -> int:
        k = math.ceil((self.motion_end_time - self.start_time) * self.sample_rate - 1e-9)
        return max(int(k), 0)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.n_samples) / self.sample_rate

    @property
    def end_time(self) -> float:
        return self.start_time + (self.n_samples - 1) / self.sample_rate

    @property
    def duration(self) -> float:
        return (self.n_samples - 1) / self.sample_rate


@dataclass(frozen=True)
class FrequencySpectrum:
    """Single-sided magnitude spectrum on uniform bins from 0 to Nyquist.

    zero_pad_factor records how much the transform was padded; one
    un-padded bin therefore spans zero_pad_factor bins of this spectrum.
    """

    frequencies: np.ndarray = field(repr=False)
    magnitudes: np.ndarray = field(repr=False)
    zero_pad_factor: int = 1

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=np.float64)
        m = np.asarray(self.magnitudes, dtype=np.float64)
        if f.ndim != 1 or f.shape != m.shape or f.shape[0] < 2:
            raise ParameterError("frequencies and magnitudes must be equal-length 1-D arrays")
        steps = np.diff(f)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ParameterError("frequency bins must be uniform")
        if np.any(m < 0):
            raise ParameterError("magnitudes must be nonnegative")
        f = f.copy()
        m = m.copy()
        f.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "magnitudes", m)
        if not (isinstance(self.zero_pad_factor, int) and self.zero_pad_factor >= 1):
            raise ParameterError("zero_pad_factor must be an integer >= 1")

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


@dataclass(frozen=True)
class ModePeak:
    """One identified vibration mode.

    mode_index counts from 1 in ascending frequency, matching the usual
    "first mode / second mode" naming.
    """

    frequency: float
    magnitude: float
    mode_index: int

    def __post_init__(self):
        if not self.frequency > 0:
            raise ParameterError(f"mode frequency must be positive, got {self.frequency}")
        if not self.magnitude > 0:
            raise ParameterError(f"mode magnitude must be positive, got {self.magnitude}")
        if self.mode_index < 1:
            raise ParameterError("mode_index counts from 1")


def residual_segment(trace: AccelTrace, min_duration: float = 0.0) -> AccelTrace:
    """Slice the ringdown that follows motion_end_time and remove its mean.

    min_duration (seconds) guards against windows too short to analyze;
    pass e.g. 2 / lowest_expected_frequency to require two full periods.
    """
    i0 = trace._residual_start_index()
    seg = trace.samples[i0:]
    if seg.shape[0] < 2:
        raise InsufficientDataError("fewer than 2 samples after motion end")
    duration = (seg.shape[0] - 1) / trace.sample_rate
    if duration < min_duration:
        raise InsufficientDataError(
            f"residual window {duration:.3f} s is shorter than the required "
            f"{min_duration:.3f} s"
        )
    t0 = trace.start_time + i0 / trace.sample_rate
    return AccelTrace(
        sample_rate=trace.sample_rate,
        samples=seg - seg.mean(),
        motion_end_time=t0,
        start_time=t0,
    )


def spectrum(segment: AccelTrace, zero_pad_factor: int = 4) -> FrequencySpectrum:
    """Hann-windowed, zero-padded magnitude spectrum of a residual segment.

    Zero padding interpolates the spectrum (bin spacing becomes
    sample_rate / (N * zero_pad_factor)) which the parabolic peak
    refinement then exploits.  The segment should already be mean-removed;
    residual_segment takes care of that.
    """
    if not (isinstance(zero_pad_factor, int) and zero_pad_factor >= 1):
        raise ParameterError(f"zero_pad_factor must be an integer >= 1, got {zero_pad_factor!r}")
    x = segment.samples
    n = x.shape[0]
    windowed = x * np.hanning(n)
    mags = np.abs(np.fft.rfft(windowed, n * zero_pad_factor))
    freqs = np.fft.rfftfreq(n * zero_pad_factor, 1.0 / segment.sample_rate)
    return FrequencySpectrum(
        frequencies=freqs, magnitudes=mags, zero_pad_factor=zero_pad_factor
    )


def _parabolic_refine(mags: np.ndarray, i: int):
    """Sub-bin offset and refined height from the bin triple around i.

    Works on log magnitudes when all three are positive (a Gaussian-ish
    peak is a parabola in log space), falls back to the plain values
    otherwise.  The offset is clamped to half a bin so refinement can
    never leave the argmax bin.
    """
    if i < 1 or i >= mags.shape[0] - 1:
        return 0.0, float(mags[i])
    a, b, g = mags[i - 1], mags[i], mags[i + 1]
    if a > 0 and b > 0 and g > 0:
        la, lb, lg = math.log(a), math.log(b), math.log(g)
        den = la - 2.0 * lb + lg
        p = 0.5 * (la - lg) / den if den != 0 else 0.0
        p = min(max(p, -0.5), 0.5)
        height = math.exp(lb - 0.25 * (la - lg) * p)
    else:
        den = a - 2.0 * b + g
        p = 0.5 * (a - g) / den if den != 0 else 0.0
        p = min(max(p, -0.5), 0.5)
        height = float(b - 0.25 * (a - g) * p)
    return float(p), height


def extract_peaks(
    spec: FrequencySpectrum,
    max_modes: int = 2,
    min_prominence_ratio: float = 0.2,
    low_cutoff_hz: float = 0.5,
) -> list:
    """Pick up to max_modes spectral peaks, strongest first, reported ascending.

    A bin qualifies when it is a local maximum at least
    min_prominence_ratio times the tallest magnitude above the cutoff.
    Competing peaks closer than one un-padded bin collapse to the taller
    one.  Frequencies are refined to sub-bin accuracy by parabolic
    interpolation over the peak bin and its neighbours.
    """
    if not (isinstance(max_modes, int) and max_modes >= 1):
        raise ParameterError(f"max_modes must be an integer >= 1, got {max_modes!r}")
    if not 0.0 < min_prominence_ratio <= 1.0:
        raise ParameterError(
            f"min_prominence_ratio must be in (0, 1], got {min_prominence_ratio!r}"
        )
    if not (np.isfinite(low_cutoff_hz) and low_cutoff_hz >= 0.0):
        raise ParameterError(f"low_cutoff_hz must be >= 0, got {low_cutoff_hz!r}")
    f = spec.frequencies
    m = spec.magnitudes
    lo = max(int(np.searchsorted(f, low_cutoff_hz)), 1)
    if lo >= f.shape[0] - 1:
        raise NoModesFoundError("low-frequency cutoff leaves no usable bins")
    search = m[lo:]
    top = search.max()
    if top <= 0:
        raise NoModesFoundError("spectrum is empty above the cutoff")
    # competing peaks must be at least one un-padded bin apart
    distance = max(spec.zero_pad_factor, 1)
    idx, props = find_peaks(search, height=min_prominence_ratio * top, distance=distance)
    if idx.size == 0:
        raise NoModesFoundError("no spectral peak above the prominence threshold")
    order = np.argsort(props["peak_heights"])[::-1][:max_modes]
    chosen = np.sort(idx[order]) + lo
    peaks = []
    for rank, i in enumerate(chosen, start=1):
        p, height = _parabolic_refine(m, int(i))
        freq = float(f[i] + p * spec.bin_width)
        peaks.append(ModePeak(frequency=freq, magnitude=height, mode_index=rank))
    return peaks


def _bandpass(x: np.ndarray, fs: float, f0: float, frac: float, roll: float = 0.5):
    """Frequency-domain band mask around f0 with raised-cosine edges.

    A hard-edged mask rings at the segment start and biases the decay
    estimate; the half-band-wide cosine roll-off keeps the onset transient
    short instead.
    """
    spec = np.fft.rfft(x)
    f = np.fft.rfftfreq(x.shape[0], 1.0 / fs)
    half = frac * f0
    trans = roll * half
    lo, hi = f0 - half, f0 + half
    g = np.zeros_like(f)
    g[(f >= lo) & (f <= hi)] = 1.0
    rise = (f > lo - trans) & (f < lo)
    g[rise] = 0.5 * (1.0 + np.cos(np.pi * (lo - f[rise]) / trans))
    fall = (f > hi) & (f < hi + trans)
    g[fall] = 0.5 * (1.0 + np.cos(np.pi * (f[fall] - hi) / trans))
    return np.fft.irfft(spec * g, x.shape[0])


def _extrema(y: np.ndarray, fs: float):
    """Positions (s) and refined |amplitudes| of the local extrema of y."""
    d = np.diff(y)
    idx = np.where(d[:-1] * d[1:] < 0)[0] + 1
    pos = np.empty(idx.shape[0])
    amps = np.empty(idx.shape[0])
    for k, i in enumerate(idx):
        a, b, g = y[i - 1], y[i], y[i + 1]
        den = a - 2.0 * b + g
        p = 0.5 * (a - g) / den if den != 0 else 0.0
        amps[k] = abs(b - 0.25 * (a - g) * p)
        pos[k] = (i + p) / fs
    return pos, amps


def estimate_k0(
    segment: AccelTrace,
    mode_freq: float,
    band_frac: float = 0.3,
    amp_floor: float = 0.06,
    tail_guard: float = 0.05,
) -> float:
    """Per-half-period amplitude decay of one mode from its ringdown.

    Band-isolates the mode (mask of +-band_frac around mode_freq), locates
    successive oscillation extrema with parabolic refinement, and returns
    the median ratio of consecutive extremum amplitudes; consecutive
    extrema of a tone are half a period apart, so that ratio is k0
    directly.  Extrema inside the filter settle window at the segment
    start, in the last tail_guard fraction of the window, or below
    amp_floor of the largest extremum are ignored as unreliable.

    Raises InsufficientDataError when the segment holds fewer than 4
    periods of mode_freq, EstimationError when too few usable extrema
    remain (callers usually fall back to k0 = 1).
    """
    if not mode_freq > 0:
        raise ParameterError(f"mode_freq must be positive, got {mode_freq!r}")
    if segment.duration < 4.0 / mode_freq:
        raise InsufficientDataError(
            f"segment spans {segment.duration:.2f} s, need at least 4 periods "
            f"({4.0 / mode_freq:.2f} s) of {mode_freq:.3f} Hz"
        )
    y = _bandpass(np.asarray(segment.samples), segment.sample_rate, mode_freq, band_frac)
    pos, amps = _extrema(y, segment.sample_rate)
    if amps.shape[0] < 4:
        raise EstimationError("too few extrema to estimate a decay ratio")
    settle = 1.0 / (band_frac * mode_freq)
    span = pos[-1] - pos[0]
    keep = (pos >= pos[0] + settle) & (pos <= pos[0] + (1.0 - tail_guard) * span)
    a = amps[keep]
    a = a[a >= amp_floor * amps.max()]
    if a.shape[0] < 3:
        # very short segments: fall back to skipping just the first two extrema
        a = amps[amps >= 0.2 * amps.max()][2:]
    if a.shape[0] < 3:
        raise EstimationError("too few usable extrema after onset/tail trimming")
    ratios = a[1:] / a[:-1]
    return float(min(np.median(ratios), 1.0))


def identify_modes(
    trace: AccelTrace,
    max_modes: int = 2,
    min_prominence_ratio: float = 0.2,
    low_cutoff_hz: float = 0.5,
    zero_pad_factor: int = 4,
    min_residual_duration=None,
) -> list:
    """Full chain: residual window -> spectrum -> peaks.

    min_residual_duration defaults to two periods of the low-frequency
    cutoff; pass 0 to disable the length check.
    """
    if min_residual_duration is None:
        min_residual_duration = 2.0 / low_cutoff_hz if low_cutoff_hz > 0 else 0.0
    seg = residual_segment(trace, min_duration=min_residual_duration)
    spec = spectrum(seg, zero_pad_factor=zero_pad_factor)
    return extract_peaks(
        spec,
        max_modes=max_modes,
        min_prominence_ratio=min_prominence_ratio,
        low_cutoff_hz=low_cutoff_hz,
    )
