import numpy as np
import pytest

from armshaper import AccelTrace


@pytest.fixture
def ringdown():
    """Factory for synthetic ringdown traces (pure residual, motion end at 0)."""

    def make(
        freqs,
        amps=None,
        zetas=None,
        phases=None,
        fs=100.0,
        duration=20.0,
        noise_std=0.0,
        seed=0,
    ):
        freqs = np.atleast_1d(freqs).astype(float)
        amps = np.ones_like(freqs) if amps is None else np.atleast_1d(amps).astype(float)
        zetas = np.zeros_like(freqs) if zetas is None else np.atleast_1d(zetas).astype(float)
        phases = np.zeros_like(freqs) if phases is None else np.atleast_1d(phases).astype(float)
        n = int(fs * duration)
        t = np.arange(n) / fs
        x = np.zeros(n)
        for f, a, z, ph in zip(freqs, amps, zetas, phases):
            w = 2 * np.pi * f
            wd = w * np.sqrt(1 - z * z)
            x += a * np.exp(-z * w * t) * np.sin(wd * t + ph)
        if noise_std > 0:
            x = x + np.random.default_rng(seed).normal(0.0, noise_std, n)
        return AccelTrace(sample_rate=fs, samples=x, motion_end_time=0.0)

    return make
