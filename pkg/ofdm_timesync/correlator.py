"""
The classic cross-correlation timing metric, and the network's input feature.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ofdm_timesync.signals import DimensionError
from ofdm_timesync.types import RealVector


class DegenerateMetric(ValueError):
    """Raised when a timing metric is identically zero and can't be normalized."""


@dataclasses.dataclass(frozen=True, eq=False)
class TimingMetric:
    """F(m) for every candidate window start m in [0, Ns)."""
    f: RealVector

    def __len__(self):
        return len(self.f)


@dataclasses.dataclass(frozen=True, eq=False)
class FeatureVector:
    """The ℓ2-normalized timing metric Q, the network input."""
    q: RealVector

    def __len__(self):
        return len(self.q)


def timing_metric(y, x) -> TimingMetric:
    """
    F(m) = |Σ_{n<N} x*(n)·y(m+n)|² for m in [0, Nw−N).

    Evaluated directly, one N-sample inner product per window start.
    """
    y = np.asarray(y, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    N = len(x)
    if y.ndim != 1 or x.ndim != 1 or N == 0:
        raise DimensionError("timing_metric needs two non-empty vectors")
    if len(y) <= N:
        raise DimensionError(f"Observed frame of {len(y)} samples is too short for a {N}-sample reference")
    Ns = len(y) - N
    windows = sliding_window_view(y, N)[:Ns]
    return TimingMetric(f=np.abs(windows @ x.conj()) ** 2)


def normalize(metric: TimingMetric) -> FeatureVector:
    """Q = F / ‖F‖₂."""
    f = np.asarray(metric.f, dtype=np.float64)
    norm = np.linalg.norm(f)
    if norm == 0 or not np.isfinite(norm):
        raise DegenerateMetric(f"Can't normalize a timing metric with norm {norm}")
    return FeatureVector(q=f / norm)


def first_argmax(values) -> int:
    """The index of the largest value; ties go to the smallest index."""
    return int(np.argmax(values))


def classic_estimate(metric: TimingMetric) -> int:
    """The baseline estimate: the peak of the timing metric."""
    return first_argmax(metric.f)
