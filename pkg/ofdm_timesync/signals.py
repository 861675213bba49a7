"""
The Zadoff-Chu training symbol and its OFDM waveform.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from ofdm_timesync.types import ComplexVector, OfdmConfig
from ofdm_timesync.utils import memoize


class InvalidRoot(ValueError):
    """Raised when a Zadoff-Chu root isn't coprime with the sequence length."""

class InvalidCyclicPrefix(ValueError):
    """Raised when the cyclic prefix is at least as long as the symbol."""

class DimensionError(ValueError):
    """Raised when a sequence has the wrong length or shape."""


@dataclasses.dataclass(frozen=True, eq=False)
class TrainingSymbol:
    """The training symbol in the frequency domain, in time, and with its CP."""
    freq: ComplexVector
    body: ComplexVector
    with_cp: ComplexVector

    @property
    def N(self) -> int:
        return len(self.body)

    @property
    def Ng(self) -> int:
        return len(self.with_cp) - len(self.body)


def _frozen(array) -> ComplexVector:
    array = np.asarray(array, dtype=np.complex128)
    array.flags.writeable = False
    return array


def zadoff_chu(N: int, u: int) -> ComplexVector:
    """
    A Zadoff-Chu sequence of length `N` with root `u`.

    Even lengths use d(k) = exp(-jπ·u·k²/N), odd lengths
    d(k) = exp(-jπ·u·k·(k+1)/N).  Every entry has unit modulus.
    """
    if N < 1:
        raise DimensionError(f"Zadoff-Chu length must be positive, got {N}")
    if math.gcd(u, N) != 1:
        raise InvalidRoot(f"Root {u} is not coprime with length {N}")
    k = np.arange(N, dtype=np.float64)
    if N % 2 == 0:
        phase = k * k
    else:
        phase = k * (k + 1)
    # Reduce the phase exactly before scaling, so large k keep full precision.
    phase = np.mod(u * phase, 2 * N)
    return np.exp(-1j * np.pi * phase / N)


def modulate(d) -> ComplexVector:
    """
    The OFDM body for frequency-domain symbols `d`.

    body(n) = (1/√N)·Σ_k d(k)·e^{j2πkn/N}, so unit-modulus symbols give unit
    mean power.
    """
    d = np.asarray(d, dtype=np.complex128)
    if d.ndim != 1 or d.size == 0:
        raise DimensionError(f"Expected a non-empty vector of symbols, got shape {d.shape}")
    return np.fft.ifft(d, norm="ortho")


def add_cp(body, Ng: int) -> ComplexVector:
    """Prepend the last `Ng` samples of `body` as a cyclic prefix."""
    body = np.asarray(body, dtype=np.complex128)
    N = len(body)
    if not 0 <= Ng < N:
        raise InvalidCyclicPrefix(f"Cyclic prefix of {Ng} samples doesn't fit a {N}-sample symbol")
    return np.concatenate([body[N - Ng:], body])


def random_data_symbol(config: OfdmConfig, rng: np.random.Generator) -> ComplexVector:
    """A CP-extended OFDM symbol carrying random QPSK data."""
    bits = rng.integers(0, 4, size=config.N)
    d = np.exp(1j * (np.pi / 4 + np.pi / 2 * bits))
    return add_cp(modulate(d), config.Ng)


@memoize
def training_symbol(config: OfdmConfig) -> TrainingSymbol:
    """The training symbol for a frame configuration."""
    freq = zadoff_chu(config.N, config.zc_root)
    body = modulate(freq)
    return TrainingSymbol(
        freq=_frozen(freq),
        body=_frozen(body),
        with_cp=_frozen(add_cp(body, config.Ng)),
    )


def local_sequence(config: OfdmConfig) -> ComplexVector:
    """The correlator's reference: the time-domain body of the training symbol."""
    return training_symbol(config).body
