"""Types shared across ofdm_timesync."""

from __future__ import annotations

import dataclasses
import math
from typing import Tuple

import numpy as np
import numpy.typing as npt

# A complex baseband sequence.
ComplexVector = npt.NDArray[np.complex128]

# A real sequence: metrics, features, labels, network outputs.
RealVector = npt.NDArray[np.float64]

# A closed interval of sample indices, (first, last).
IndexInterval = Tuple[int, int]


class InvalidConfig(ValueError):
    """Raised when frame dimensions or run parameters are inconsistent."""


@dataclasses.dataclass(frozen=True)
class OfdmConfig:
    """
    Frame dimensions, the single source of truth for sizes.

    Only `N`, `Ng` and `zc_root` are free; `Nw` and `Ns` are derived.
    """
    N: int = 128
    Ng: int = 32
    zc_root: int = 25

    def __post_init__(self):
        if not 0 < self.Ng < self.N:
            raise InvalidConfig(f"Need 0 < Ng < N, got N={self.N}, Ng={self.Ng}")
        if math.gcd(self.zc_root, self.N) != 1:
            raise InvalidConfig(f"zc_root={self.zc_root} is not coprime with N={self.N}")
        assert self.Nw == 2 * self.N + self.Ng
        assert self.Ns == self.N + self.Ng == self.Nw - self.N

    @property
    def Nw(self) -> int:
        """Observation window length."""
        return 2 * self.N + self.Ng

    @property
    def Ns(self) -> int:
        """Search range length, also the network input and output width."""
        return self.Nw - self.N

    @property
    def max_theta(self) -> int:
        """The largest legal timing offset."""
        return self.Ns - self.Ng - 1


@dataclasses.dataclass(frozen=True)
class TrainingParams:
    """Knobs of the offline training pipeline."""
    samples: int = 10_000
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.001
    patience: int = 10
    validation_fraction: float = 0.1
    # Multiply the learning rate by `lr_decay` every `lr_decay_every` epochs.
    # 0 disables the schedule.
    lr_decay: float = 1.0
    lr_decay_every: int = 0
    cfo: float = 0.0
    label_mode: str = "triangular"
    # How many times a degenerate frame is redrawn before giving up.
    max_redraws: int = 10

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidConfig(f"Need at least one training sample, got {self.samples}")
        if self.batch_size < 1:
            raise InvalidConfig(f"batch_size must be positive, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise InvalidConfig(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 <= self.validation_fraction < 1:
            raise InvalidConfig(f"validation_fraction must be in [0, 1), got {self.validation_fraction}")
        if self.epochs < 1 or self.patience < 1 or self.max_redraws < 0:
            raise InvalidConfig(
                f"Bad training schedule: epochs={self.epochs}, patience={self.patience}, "
                f"max_redraws={self.max_redraws}"
            )
        if self.label_mode not in ("triangular", "rectangular"):
            raise InvalidConfig(f"Unknown label_mode {self.label_mode!r}")


@dataclasses.dataclass(frozen=True)
class EvaluationParams:
    """Knobs of the Monte-Carlo evaluation."""
    trials: int = 2000
    snr_db: Tuple[float, ...] = (-2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    cfo: float = 0.0

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidConfig(f"trials must be at least 1, got {self.trials}")
        if not self.snr_db:
            raise InvalidConfig("The SNR list is empty")


def coprime_root(N: int, start: int) -> int:
    """The smallest Zadoff-Chu root >= `start` that is coprime with `N`."""
    root = max(start, 1)
    while math.gcd(root, N) != 1:
        root += 1
    return root


def default_los_ratio(Ng: int) -> int:
    """⌈7·Ng/8⌉, the LOS ratio used throughout the experiments."""
    return -(-7 * Ng // 8)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything a run needs: frame, LOS prior, training and evaluation knobs."""
    ofdm: OfdmConfig = OfdmConfig()
    los_ratio: int = 28
    training: TrainingParams = TrainingParams()
    evaluation: EvaluationParams = EvaluationParams()

    def with_n(self, N: int) -> RunConfig:
        """The same run with a different subcarrier count, keeping Ng."""
        ofdm = OfdmConfig(N=N, Ng=self.ofdm.Ng, zc_root=coprime_root(N, self.ofdm.zc_root))
        return dataclasses.replace(self, ofdm=ofdm)
