import numpy as np
import pytest

from armshaper import (
    AccelTrace,
    EstimationError,
    FrequencySpectrum,
    InsufficientDataError,
    NoModesFoundError,
    ParameterError,
    estimate_k0,
    extract_peaks,
    identify_modes,
    k0_from_damping_ratio,
    residual_segment,
    spectrum,
)


# ---------------------------------------------------------------------------
# trace handling


def test_trace_validation():
    good = np.zeros(100)
    with pytest.raises(ParameterError):
        AccelTrace(sample_rate=-1.0, samples=good, motion_end_time=0.0)
    with pytest.raises(ParameterError):
        AccelTrace(sample_rate=100.0, samples=np.ones((2, 50)), motion_end_time=0.0)
    with pytest.raises(ParameterError):
        AccelTrace(sample_rate=100.0, samples=[1.0], motion_end_time=0.0)
    with pytest.raises(ParameterError):
        AccelTrace(sample_rate=100.0, samples=good, motion_end_time=2.0)  # past end
    with pytest.raises(ParameterError):
        AccelTrace(sample_rate=100.0, samples=good, motion_end_time=-0.5)
    bad = good.copy()
    bad[10] = np.inf
    with pytest.raises(ParameterError):
        AccelTrace(sample_rate=100.0, samples=bad, motion_end_time=0.0)


def test_residual_segment_slices_after_motion():
    fs = 100.0
    trace = AccelTrace(sample_rate=fs, samples=np.arange(1000.0), motion_end_time=2.0)
    seg = residual_segment(trace)
    assert seg.n_samples == 800
    assert seg.start_time == 2.0
    assert seg.motion_end_time == 2.0


def test_residual_segment_removes_mean():
    fs = 100.0
    x = np.full(500, 9.81)
    trace = AccelTrace(sample_rate=fs, samples=x, motion_end_time=1.0)
    seg = residual_segment(trace)
    np.testing.assert_allclose(seg.samples, 0.0, atol=1e-12)

    t = np.arange(500) / fs
    y = 0.5 + np.sin(2 * np.pi * 1.3 * t)
    trace2 = AccelTrace(sample_rate=fs, samples=y, motion_end_time=0.0)
    seg2 = residual_segment(trace2)
    np.testing.assert_allclose(seg2.samples, y - y.mean(), atol=1e-12)


def test_residual_segment_min_duration():
    trace = AccelTrace(sample_rate=100.0, samples=np.zeros(300), motion_end_time=1.0)
    with pytest.raises(InsufficientDataError):
        residual_segment(trace, min_duration=5.0)
    seg = residual_segment(trace, min_duration=1.5)
    assert seg.duration >= 1.5


# ---------------------------------------------------------------------------
# spectra


def test_spectrum_bin_spacing_includes_padding():
    fs = 100.0
    seg = AccelTrace(sample_rate=fs, samples=np.random.default_rng(0).normal(size=400),
                     motion_end_time=0.0)
    spec = spectrum(seg, zero_pad_factor=4)
    assert spec.bin_width == pytest.approx(fs / (400 * 4), rel=1e-12)
    assert spec.frequencies[0] == 0.0
    assert spec.frequencies[-1] == pytest.approx(fs / 2, rel=1e-9)


def test_spectrum_peak_near_tone(ringdown):
    spec = spectrum(residual_segment(ringdown(1.9)))
    f_peak = spec.frequencies[np.argmax(spec.magnitudes)]
    assert f_peak == pytest.approx(1.9, abs=2 * spec.bin_width)


def test_spectrum_magnitude_scales_linearly(ringdown):
    seg = residual_segment(ringdown(2.3))
    big = AccelTrace(sample_rate=seg.sample_rate, samples=3.0 * seg.samples,
                     motion_end_time=seg.motion_end_time, start_time=seg.start_time)
    s1 = spectrum(seg)
    s3 = spectrum(big)
    np.testing.assert_allclose(s3.magnitudes, 3.0 * s1.magnitudes, rtol=1e-10, atol=1e-12)


def test_spectrum_rejects_bad_padding(ringdown):
    seg = residual_segment(ringdown(1.9))
    for bad in (0, -1):
        with pytest.raises(ParameterError):
            spectrum(seg, zero_pad_factor=bad)


def test_spectrum_type_validation():
    with pytest.raises(ParameterError):
        FrequencySpectrum(frequencies=[0.0, 0.1, 0.3], magnitudes=[1, 1, 1])
    with pytest.raises(ParameterError):
        FrequencySpectrum(frequencies=[0.0, 0.1], magnitudes=[1, 1, 1])


# ---------------------------------------------------------------------------
# peak extraction


def test_two_well_separated_modes(ringdown):
    trace = ringdown([1.9, 3.8], amps=[1.0, 0.6])
    peaks = identify_modes(trace)
    assert len(peaks) == 2
    assert peaks[0].mode_index == 1
    assert peaks[1].mode_index == 2
    assert peaks[0].frequency == pytest.approx(1.9, abs=0.01)
    assert peaks[1].frequency == pytest.approx(3.8, abs=0.01)
    assert peaks[0].magnitude > peaks[1].magnitude


def test_single_mode_yields_one_peak(ringdown):
    peaks = identify_modes(ringdown(2.6))
    assert len(peaks) == 1
    assert peaks[0].frequency == pytest.approx(2.6, abs=0.01)


def test_weak_second_mode_below_prominence_is_dropped(ringdown):
    trace = ringdown([1.9, 3.8], amps=[1.0, 0.05])
    peaks = identify_modes(trace)
    assert len(peaks) == 1


def test_flat_trace_raises_no_modes(ringdown):
    trace = AccelTrace(sample_rate=100.0, samples=np.zeros(2000), motion_end_time=0.0)
    with pytest.raises(NoModesFoundError):
        identify_modes(trace)


def test_low_frequency_rumble_is_ignored(ringdown):
    # a strong 0.2 Hz drift below the cutoff must not count as a mode
    trace = ringdown([0.2, 2.4], amps=[5.0, 1.0])
    peaks = identify_modes(trace)
    assert all(p.frequency > 0.5 for p in peaks)
    assert peaks[0].frequency == pytest.approx(2.4, abs=0.01)


def test_max_modes_keeps_strongest(ringdown):
    trace = ringdown([1.2, 2.7, 4.1], amps=[0.8, 1.0, 0.7])
    peaks = identify_modes(trace, max_modes=2)
    freqs = [p.frequency for p in peaks]
    assert len(freqs) == 2
    assert freqs[0] == pytest.approx(1.2, abs=0.02)
    assert freqs[1] == pytest.approx(2.7, abs=0.02)


def test_peaks_sorted_ascending_and_indexed(ringdown):
    rng = np.random.default_rng(21)
    for _ in range(10):
        f1 = rng.uniform(1.0, 2.5)
        f2 = f1 * rng.uniform(1.7, 2.4)
        peaks = identify_modes(ringdown([f1, f2], amps=[1.0, rng.uniform(0.4, 1.0)]))
        freqs = [p.frequency for p in peaks]
        assert freqs == sorted(freqs)
        assert [p.mode_index for p in peaks] == list(range(1, len(peaks) + 1))


def test_refinement_stays_within_one_unpadded_bin(ringdown):
    rng = np.random.default_rng(4)
    for _ in range(15):
        f = rng.uniform(1.0, 4.0)
        seg = residual_segment(ringdown(f, duration=10.0))
        spec = spectrum(seg)
        unpadded_bin = spec.bin_width * 4
        peaks = extract_peaks(spec, max_modes=1)
        coarse = spec.frequencies[np.argmax(spec.magnitudes)]
        assert abs(peaks[0].frequency - coarse) <= unpadded_bin


def test_extract_peaks_argument_validation(ringdown):
    spec = spectrum(residual_segment(ringdown(1.9)))
    with pytest.raises(ParameterError):
        extract_peaks(spec, max_modes=0)
    with pytest.raises(ParameterError):
        extract_peaks(spec, min_prominence_ratio=1.5)
    with pytest.raises(ParameterError):
        extract_peaks(spec, low_cutoff_hz=-1.0)


def test_identification_accuracy_noisy(ringdown):
    # 20 dB SNR, damping on, random second-mode ratio: refined peaks must
    # stay well inside a twentieth of a hertz
    rng = np.random.default_rng(99)
    for i in range(20):
        f1 = rng.uniform(1.5, 2.3)
        f2 = f1 * rng.uniform(1.8, 2.2)
        a2 = rng.uniform(0.6, 1.0)
        trace = ringdown(
            [f1, f2],
            amps=[1.0, a2],
            zetas=[0.01, 0.01],
            phases=rng.uniform(0, 2 * np.pi, 2),
            noise_std=0.1,
            seed=1000 + i,
            duration=12.0,
        )
        peaks = identify_modes(trace)
        assert len(peaks) == 2
        assert peaks[0].frequency == pytest.approx(f1, abs=0.05)
        assert peaks[1].frequency == pytest.approx(f2, abs=0.05)


# ---------------------------------------------------------------------------
# decay-ratio estimation


def test_estimate_k0_undamped_is_near_one(ringdown):
    seg = residual_segment(ringdown(1.9, duration=15.0))
    k0 = estimate_k0(seg, 1.9)
    assert k0 == pytest.approx(1.0, abs=0.02)
    assert k0 <= 1.0


@pytest.mark.parametrize("zeta", [0.005, 0.01, 0.02, 0.05])
def test_estimate_k0_matches_damping(ringdown, zeta):
    seg = residual_segment(ringdown(2.0, zetas=[zeta], duration=18.0))
    k0 = estimate_k0(seg, 2.0)
    assert k0 == pytest.approx(k0_from_damping_ratio(zeta), abs=0.02)


def test_estimate_k0_tolerates_noise(ringdown):
    rng = np.random.default_rng(8)
    for i in range(10):
        zeta = rng.uniform(0.005, 0.03)
        f = rng.uniform(1.5, 3.0)
        seg = residual_segment(
            ringdown(f, zetas=[zeta], noise_std=0.01, seed=300 + i, duration=18.0)
        )
        k0 = estimate_k0(seg, f)
        assert k0 == pytest.approx(k0_from_damping_ratio(zeta), abs=0.02)


def test_estimate_k0_ignores_other_mode(ringdown):
    seg = residual_segment(ringdown([1.9, 3.8], amps=[1.0, 0.8], zetas=[0.02, 0.01]))
    k0 = estimate_k0(seg, 1.9)
    assert k0 == pytest.approx(k0_from_damping_ratio(0.02), abs=0.02)


def test_estimate_k0_needs_enough_periods(ringdown):
    seg = residual_segment(ringdown(1.9, duration=1.5))
    with pytest.raises(InsufficientDataError):
        estimate_k0(seg, 1.9)


def test_estimate_k0_fails_on_silence():
    seg = AccelTrace(sample_rate=100.0, samples=np.zeros(2000), motion_end_time=0.0)
    with pytest.raises(EstimationError):
        estimate_k0(seg, 1.9)


def test_estimate_k0_never_exceeds_one(ringdown):
    rng = np.random.default_rng(17)
    for i in range(8):
        seg = residual_segment(ringdown(2.2, noise_std=0.02, seed=i, duration=16.0))
        assert estimate_k0(seg, 2.2) <= 1.0
