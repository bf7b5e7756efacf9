"""Pure Python / NumPy implementations of the two hot kernels.

These mirror armshaper._kernels (the Cython build) exactly; the backend
module picks whichever is importable.  Keep the two in sync, the test
suite compares them sample for sample.
"""

import math

import numpy as np


def modal_response(u, dt, omega, zeta):
    """March one second-order section through a sampled input.

    The section is x'' + 2*zeta*omega*x' + omega**2 * x = omega**2 * u(t)
    with u held constant over each sample interval.  The update matrix is
    the exact matrix exponential of the interval, so the returned samples
    are the true continuous-time solution at the sample instants (no
    integrator error).  Initial state: x = u[0], v = 0, i.e. the plant sits
    at rest at the first commanded value.

    Returns (x, v) as float64 arrays the same length as u.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    n = u.shape[0]
    x = np.empty(n)
    v = np.empty(n)
    if n == 0:
        return x, v

    wd = omega * math.sqrt(1.0 - zeta * zeta)
    decay = math.exp(-zeta * omega * dt)
    c = math.cos(wd * dt)
    s = math.sin(wd * dt)
    a00 = decay * (c + zeta * omega / wd * s)
    a01 = decay * s / wd
    a10 = -decay * omega * omega / wd * s
    a11 = decay * (c - zeta * omega / wd * s)
    # forced response to a held input is the input itself, so the input
    # matrix is (I - Ad) restricted to the position column
    b0 = 1.0 - a00
    b1 = -a10

    xc = float(u[0])
    vc = 0.0
    x[0] = xc
    v[0] = vc
    for k in range(n - 1):
        uk = u[k]
        xn = a00 * xc + a01 * vc + b0 * uk
        vn = a10 * xc + a11 * vc + b1 * uk
        x[k + 1] = xn
        v[k + 1] = vn
        xc = xn
        vc = vn
    return x, v


def shape_channel(y, amps, delays, n_out):
    """Convolve one sampled channel with an impulse train.

    delays are in fractional samples.  Reads outside the input are clamped:
    before the first sample the channel is held at y[0] (the plant was at
    rest there), past the last sample it is held at y[-1].  Fractional
    positions use linear interpolation between neighbours.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    amps = np.ascontiguousarray(amps, dtype=np.float64)
    delays = np.ascontiguousarray(delays, dtype=np.float64)
    n = y.shape[0]
    out = np.zeros(int(n_out))
    if n == 1:
        out[:] = y[0] * amps.sum()
        return out
    t = np.arange(int(n_out), dtype=np.float64)
    for a, d in zip(amps, delays):
        src = np.clip(t - d, 0.0, n - 1.0)
        i = np.minimum(src.astype(np.intp), n - 2)
        frac = src - i
        out += a * ((1.0 - frac) * y[i] + frac * y[i + 1])
    return out
