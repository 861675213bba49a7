"""
Training labels over the ISI-free region, and the LOS-prior τ_L sampler.

A DFT window starting at m is free of inter-symbol interference when
τ_L ≤ m−θ ≤ Ng.  The triangular label marks that region, rising toward its
approximate midpoint μ = θ + ⌈(τ_L+Ng)/2⌉, and is zero everywhere else.
"""

from __future__ import annotations

import dataclasses
import enum

import numpy as np

from ofdm_timesync.types import IndexInterval, RealVector


class InvalidLabelSpec(ValueError):
    """Raised when a label can't be laid out inside the search range."""

class PriorViolation(ValueError):
    """Raised when the LOS ratio isn't strictly between 0 and Ng."""


class LabelMode(enum.Enum):
    """
    The shape of the label over the ISI-free region.

    RECTANGULAR approximates the flat label of earlier label-designed
    synchronizers; it is not an exact reproduction of it.
    """
    TRIANGULAR = "triangular"
    RECTANGULAR = "rectangular"

    @property
    def is_approximation(self) -> bool:
        return self is LabelMode.RECTANGULAR


@dataclasses.dataclass(frozen=True)
class LabelSpec:
    """Where and how to draw a label."""
    theta: int
    tau_L: int
    Ng: int
    Ns: int
    mode: LabelMode = LabelMode.TRIANGULAR

    def __post_init__(self):
        check_region(self.theta, self.tau_L, self.Ng, self.Ns)
        if self.tau_L < 1:
            raise InvalidLabelSpec(f"Labels need tau_L >= 1, got {self.tau_L}")
        if not isinstance(self.mode, LabelMode):
            object.__setattr__(self, "mode", LabelMode(self.mode))


@dataclasses.dataclass(frozen=True, eq=False)
class TimingLabel:
    """The target vector t, length Ns."""
    t: RealVector
    spec: LabelSpec

    def __len__(self):
        return len(self.t)


@dataclasses.dataclass(frozen=True)
class LosPrior:
    """⌈ξ_LOS/(c·T)⌉: the LOS propagation range expressed in samples."""
    los_ratio: int

    def check(self, Ng: int) -> None:
        if not 0 < self.los_ratio < Ng:
            raise PriorViolation(f"Need 0 < los_ratio < Ng, got los_ratio={self.los_ratio}, Ng={Ng}")


def check_region(theta: int, tau_L: int, Ng: int, Ns=None) -> None:
    """Raise InvalidLabelSpec unless (theta, tau_L) gives a region inside the search range."""
    if theta < 0:
        raise InvalidLabelSpec(f"theta must be nonnegative, got {theta}")
    if not 0 <= tau_L <= Ng:
        raise InvalidLabelSpec(f"tau_L={tau_L} is outside [0, Ng={Ng}]")
    if Ns is not None and theta + Ng > Ns - 1:
        raise InvalidLabelSpec(f"theta={theta} leaves no room for the region in Ns={Ns}")


def isi_free_region(theta: int, tau_L: int, Ng: int) -> IndexInterval:
    """Ω_free = [theta+tau_L, theta+Ng], D = Ng − tau_L + 1 samples long."""
    check_region(theta, tau_L, Ng)
    return theta + tau_L, theta + Ng


def isi_region_mask(theta: int, tau_L: int, Ng: int, Ns: int) -> np.ndarray:
    """True for every window start in [0, Ns) that suffers ISI."""
    first, last = isi_free_region(theta, tau_L, Ng)
    m = np.arange(Ns)
    return (m < first) | (m > last)


def narrowed_region(theta: int, prior: LosPrior, Ng: int) -> IndexInterval:
    """
    Ω_nfree = {m : los_ratio ≤ m−θ < Ng}, the part of the region the LOS
    prior guarantees whatever the real τ_L is.
    """
    prior.check(Ng)
    return theta + prior.los_ratio, theta + Ng - 1


def zeta(d: int, D: int) -> int:
    """The label value at position d (1-based) of a D-sample region."""
    if not 1 <= d <= D:
        raise InvalidLabelSpec(f"Position {d} is outside [1, {D}]")
    return d if d < -(-(D + 1) // 2) else D - d + 1


def midpoint(theta: int, tau_L: int, Ng: int) -> int:
    """μ = θ + ⌈(τ_L+Ng)/2⌉."""
    check_region(theta, tau_L, Ng)
    return theta + -(-(tau_L + Ng) // 2)


def build_label(spec: LabelSpec) -> TimingLabel:
    """
    Lay out [theta+tau_L zeros | region values | Ns−theta−Ng−1 zeros].
    """
    if spec.mode is LabelMode.RECTANGULAR:
        t = np.where(isi_region_mask(spec.theta, spec.tau_L, spec.Ng, spec.Ns), 0.0, 1.0)
        return TimingLabel(t=t, spec=spec)
    first, last = isi_free_region(spec.theta, spec.tau_L, spec.Ng)
    D = last - first + 1
    t = np.zeros(spec.Ns, dtype=np.float64)
    t[first:last + 1] = [zeta(d, D) for d in range(1, D + 1)]
    return TimingLabel(t=t, spec=spec)


def tau_L_range(prior: LosPrior, Ng: int) -> IndexInterval:
    """The inclusive range τ_L is drawn from for labeling."""
    prior.check(Ng)
    if prior.los_ratio < -(-Ng // 2):
        return 1, prior.los_ratio
    # With los_ratio = Ng/2 the lower bound would be 0, which has no label.
    return max(1, 2 * prior.los_ratio - Ng), prior.los_ratio


def sample_tau_L(prior: LosPrior, Ng: int, rng: np.random.Generator) -> int:
    """Draw a labeling τ_L uniformly from `tau_L_range`."""
    low, high = tau_L_range(prior, Ng)
    return int(rng.integers(low, high, endpoint=True))
