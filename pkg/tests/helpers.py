"""Helpers for tests: slow, obviously-correct versions of the real code."""

import numpy as np

from ofdm_timesync import network
from ofdm_timesync.channel import ChannelRealization, assemble_frame, observe
from ofdm_timesync.signals import training_symbol


def direct_timing_metric(y, x):
    """F(m) computed with two plain loops."""
    N = len(x)
    Ns = len(y) - N
    f = np.zeros(Ns)
    for m in range(Ns):
        acc = 0j
        for n in range(N):
            acc += np.conj(x[n]) * y[m + n]
        f[m] = abs(acc) ** 2
    return f


def label_by_index(theta, tau_L, Ng, Ns, rectangular=False):
    """The label evaluated one index at a time."""
    D = Ng - tau_L + 1
    t = np.zeros(Ns)
    for m in range(Ns):
        d = m - (theta + tau_L) + 1
        if 1 <= d <= D:
            t[m] = 1.0 if rectangular else min(d, D - d + 1)
    return t


def unit_vectors(rng, count, n):
    """`count` random nonnegative vectors of length `n`, each with unit norm."""
    v = rng.random((count, n)) + 0.01
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_batch(rng, count, n):
    return network.Batch(inputs=unit_vectors(rng, count, n), targets=rng.normal(size=(count, n)))


def numeric_gradients(model, batch, step=1e-4):
    """Central finite differences of the loss, for every parameter."""
    grads = []
    arrays = [np.array(a) for a in model.arrays()]
    for i, base in enumerate(arrays):
        g = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            plus = [a.copy() for a in arrays]
            minus = [a.copy() for a in arrays]
            plus[i][idx] += step
            minus[i][idx] -= step
            g[idx] = (
                network.loss(network.Mlp(*plus), batch) - network.loss(network.Mlp(*minus), batch)
            ) / (2 * step)
        grads.append(g)
    return grads


def relative_error(a, b):
    a, b = np.ravel(a), np.ravel(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return np.linalg.norm(a - b) / scale


def noiseless_frame(config, theta, rng, gains=(1.0,), delays=(0,), cfo=0.0):
    """A frame through a fixed channel with no noise."""
    stream = assemble_frame(config, training_symbol(config), theta, rng)
    realization = ChannelRealization(
        gains=np.array(gains, dtype=np.complex128),
        delays=np.array(delays),
        theta=theta,
        cfo=cfo,
        noise_var=0.0,
    )
    return stream, observe(stream, realization, config)
