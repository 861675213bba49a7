"""
Multipath channels: delay profiles, Rayleigh draws, and the observed frame.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ofdm_timesync.signals import TrainingSymbol, random_data_symbol
from ofdm_timesync.types import ComplexVector, OfdmConfig
from ofdm_timesync.utils import memoize, read_package_text

logger = logging.getLogger(__name__)

# Shipped profiles, by name.
SHIPPED_PROFILES = {
    "TDL-B": "tdl_b.txt",
    "TDL-C": "tdl_c.txt",
}


class ProfileError(ValueError):
    """Raised when a delay profile is malformed or doesn't fit the CP."""

class InvalidOffset(ValueError):
    """Raised when a timing offset is outside the legal range."""


@dataclasses.dataclass(frozen=True)
class DelayProfile:
    """Integer tap delays (samples) and their average powers, summing to 1."""
    name: str
    taps: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        if not self.taps:
            raise ProfileError(f"Profile {self.name!r} has no taps")
        delays = [d for d, _ in self.taps]
        if delays[0] != 0:
            raise ProfileError(f"Profile {self.name!r} must start at delay 0, not {delays[0]}")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ProfileError(f"Profile {self.name!r} delays must strictly increase: {delays}")
        if any(p <= 0 for _, p in self.taps):
            raise ProfileError(f"Profile {self.name!r} has a non-positive tap power")
        if abs(sum(p for _, p in self.taps) - 1.0) > 1e-9:
            raise ProfileError(f"Profile {self.name!r} powers don't sum to 1")

    @property
    def delays(self) -> np.ndarray:
        return np.array([d for d, _ in self.taps], dtype=np.int64)

    @property
    def powers(self) -> np.ndarray:
        return np.array([p for _, p in self.taps], dtype=np.float64)

    @property
    def max_delay(self) -> int:
        """τ_L, the delay of the last path."""
        return self.taps[-1][0]

    def check_fits(self, config: OfdmConfig) -> None:
        """Raise ProfileError unless every delay is shorter than the CP."""
        if self.max_delay >= config.Ng:
            raise ProfileError(
                f"Profile {self.name!r} has maximum delay {self.max_delay}, which needs Ng > {self.max_delay}"
            )


@dataclasses.dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of the channel and impairments of a frame."""
    gains: ComplexVector
    delays: np.ndarray
    theta: int
    cfo: float
    noise_var: float

    @property
    def max_delay(self) -> int:
        return int(self.delays[-1])


@dataclasses.dataclass(frozen=True, eq=False)
class TransmitStream:
    """
    The transmitted samples around the training symbol.

    `samples[0]` lines up with the first sample of the observed window.
    `history` holds the samples just before it, which late paths still carry
    into the start of the window.
    """
    samples: ComplexVector
    history: ComplexVector

    def padded(self) -> ComplexVector:
        return np.concatenate([self.history, self.samples])


@dataclasses.dataclass(frozen=True, eq=False)
class ObservedFrame:
    """The buffered observation vector y and the channel that produced it."""
    y: ComplexVector
    truth: ChannelRealization


def _normalized(name: str, taps: List[Tuple[int, float]]) -> DelayProfile:
    total = sum(p for _, p in taps)
    return DelayProfile(name=name, taps=tuple((d, p / total) for d, p in taps))


def exp_decay_profile(L: int, eta: float) -> DelayProfile:
    """
    An exponentially decayed profile: τ_l = l−1, power ∝ e^{−eta·(l−1)}.
    """
    if L < 1:
        raise ProfileError(f"Need at least one tap, got L={L}")
    if eta < 0:
        raise ProfileError(f"Decay factor must be nonnegative, got {eta}")
    taps = [(l, math.exp(-eta * l)) for l in range(L)]
    return _normalized(f"exp-decay(L={L}, eta={eta:.6g})", taps)


def parse_tdl_profile(text: str, name: str = "TDL") -> DelayProfile:
    """
    Parse the text of a TDL profile file.

    The file has a ``scale_samples <float>`` header line, then one
    ``<normalized_delay> <power_dB>`` row per tap.  Lines starting with ``#``
    are comments.  Delays are scaled to samples and rounded to the nearest
    integer; taps landing on the same sample are merged by summing their
    linear powers.
    """
    scale: Optional[float] = None
    rows: List[Tuple[float, float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "scale_samples":
                scale = float(fields[1])
                continue
            delay, power_db = float(fields[0]), float(fields[1])
        except (IndexError, ValueError) as exc:
            raise ProfileError(f"{name}: can't parse line {lineno}: {line!r}") from exc
        if delay < 0:
            raise ProfileError(f"{name}: negative delay on line {lineno}")
        rows.append((delay, power_db))

    if scale is None:
        raise ProfileError(f"{name}: missing scale_samples header")
    if scale <= 0:
        raise ProfileError(f"{name}: scale_samples must be positive, got {scale}")
    if not rows:
        raise ProfileError(f"{name}: no taps")

    merged = {}
    for delay, power_db in rows:
        sample = int(round(delay * scale))
        merged[sample] = merged.get(sample, 0.0) + 10 ** (power_db / 10)
    first = min(merged)
    taps = [(d - first, merged[d]) for d in sorted(merged)]
    profile = _normalized(name, taps)
    logger.debug(f"Loaded {name}: {len(rows)} rows -> {len(taps)} taps, max delay {profile.max_delay}")
    return profile


def load_tdl_profile(file: Union[str, Path], config: Optional[OfdmConfig] = None) -> DelayProfile:
    """
    Load a TDL profile file, or a shipped profile by name ("TDL-B", "TDL-C").

    With `config`, the profile must fit inside the cyclic prefix.
    """
    profile = _load_tdl_profile(str(file))
    if config is not None:
        profile.check_fits(config)
    return profile


@memoize
def _load_tdl_profile(file: str) -> DelayProfile:
    if file in SHIPPED_PROFILES:
        return parse_tdl_profile(read_package_text(SHIPPED_PROFILES[file]), name=file)
    path = Path(file)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProfileError(f"Can't read profile {file!r}: {exc}") from exc
    return parse_tdl_profile(text, name=path.stem)


def check_theta(config: OfdmConfig, theta: int) -> None:
    if not 0 <= theta <= config.max_theta:
        raise InvalidOffset(f"theta={theta} is outside [0, {config.max_theta}]")


def noise_variance(snr_db: float) -> float:
    """σ² for an SNR in dB, with unit transmit power."""
    return 10 ** (-snr_db / 10)


def draw_realization(
        profile: DelayProfile,
        theta: int,
        cfo: float,
        snr_db: float,
        rng: np.random.Generator,
        config: Optional[OfdmConfig] = None,
    ) -> ChannelRealization:
    """
    Draw Rayleigh tap gains for `profile`.

    The gains are renormalized so that Σ|h_l|² = 1 exactly for every draw.
    """
    if theta < 0 or (config is not None and theta > config.max_theta):
        raise InvalidOffset(f"theta={theta} is outside the legal range")
    if config is not None:
        profile.check_fits(config)
    powers = profile.powers
    g = (rng.standard_normal(len(powers)) + 1j * rng.standard_normal(len(powers))) / math.sqrt(2)
    gains = np.sqrt(powers) * g
    gains = gains / np.linalg.norm(gains)
    return ChannelRealization(
        gains=gains,
        delays=profile.delays,
        theta=int(theta),
        cfo=float(cfo),
        noise_var=noise_variance(snr_db),
    )


def _filler(config: OfdmConfig, length: int, rng: np.random.Generator) -> ComplexVector:
    """`length` samples of back-to-back random data symbols."""
    if length <= 0:
        return np.zeros(0, dtype=np.complex128)
    count = -(-length // (config.N + config.Ng))
    return np.concatenate([random_data_symbol(config, rng) for _ in range(count)])[:length]


def assemble_frame(
        config: OfdmConfig,
        symbol: TrainingSymbol,
        theta: int,
        rng: np.random.Generator,
    ) -> TransmitStream:
    """
    Place the training symbol so its CP starts at `theta`, with random data
    symbols before and after it.

    The stream covers Nw + Ng samples; the Ng samples before index 0 are kept
    as history for delayed paths.
    """
    check_theta(config, theta)
    sym_len = config.Ng + config.N
    total = config.Nw + config.Ng
    history_len = config.Ng
    before = _filler(config, history_len + theta, rng)
    after = _filler(config, total - theta - sym_len, rng)
    full = np.concatenate([before, symbol.with_cp, after])
    return TransmitStream(samples=full[history_len:], history=full[:history_len])


def observe(stream: TransmitStream, realization: ChannelRealization, config: OfdmConfig,
            rng: Optional[np.random.Generator] = None) -> ObservedFrame:
    """
    Pass a stream through the channel and buffer Nw received samples.

    y(n) = e^{j2πnε/N}·Σ_l h_l·stream(n−τ_l) + w(n).  Noise needs `rng`
    unless the realization is noiseless.
    """
    Nw = config.Nw
    lead = len(stream.history)
    padded = stream.padded()
    if len(stream.samples) < Nw:
        raise ProfileError(f"Stream of {len(stream.samples)} samples can't fill a {Nw}-sample window")
    if realization.max_delay > lead:
        raise ProfileError(f"Delay {realization.max_delay} exceeds the {lead} samples of stream history")

    received = np.zeros(Nw, dtype=np.complex128)
    for gain, delay in zip(realization.gains, realization.delays):
        start = lead - int(delay)
        received += gain * padded[start:start + Nw]

    if realization.cfo:
        n = np.arange(Nw)
        received = received * np.exp(2j * np.pi * n * realization.cfo / config.N)

    if realization.noise_var > 0:
        if rng is None:
            raise ValueError("A noisy realization needs an rng to draw the noise")
        scale = math.sqrt(realization.noise_var / 2)
        received = received + scale * (rng.standard_normal(Nw) + 1j * rng.standard_normal(Nw))

    return ObservedFrame(y=received, truth=realization)
