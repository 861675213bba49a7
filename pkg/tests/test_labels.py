"""Tests of labels.py"""

import numpy as np
import pytest

from ofdm_timesync.labels import (
    InvalidLabelSpec,
    LabelMode,
    LabelSpec,
    LosPrior,
    PriorViolation,
    build_label,
    isi_free_region,
    isi_region_mask,
    midpoint,
    narrowed_region,
    sample_tau_L,
    tau_L_range,
    zeta,
)

from .helpers import label_by_index


def test_published_label():
    label = build_label(LabelSpec(theta=0, tau_L=28, Ng=32, Ns=160))
    assert len(label) == 160
    assert list(label.t[:28]) == [0] * 28
    assert list(label.t[28:33]) == [1, 2, 3, 2, 1]
    assert list(label.t[33:]) == [0] * 127


def test_label_property_sweep(rng):
    Ng, Ns = 32, 160
    for _ in range(2000):
        tau_L = int(rng.integers(1, Ng, endpoint=True))
        theta = int(rng.integers(0, Ns - Ng - 1, endpoint=True))
        label = build_label(LabelSpec(theta, tau_L, Ng, Ns))
        assert np.array_equal(label.t, label_by_index(theta, tau_L, Ng, Ns))
        first, last = isi_free_region(theta, tau_L, Ng)
        assert set(np.flatnonzero(label.t)) == set(range(first, last + 1))
        mu = midpoint(theta, tau_L, Ng)
        assert label.t[mu] == label.t.max()
        assert first <= mu <= last


def test_rectangular_label():
    spec = LabelSpec(theta=5, tau_L=28, Ng=32, Ns=160, mode="rectangular")
    assert spec.mode is LabelMode.RECTANGULAR
    assert spec.mode.is_approximation
    assert not LabelMode.TRIANGULAR.is_approximation
    label = build_label(spec)
    assert np.array_equal(label.t, label_by_index(5, 28, 32, 160, rectangular=True))


def test_label_modes_share_support(label_mode):
    label = build_label(LabelSpec(theta=3, tau_L=26, Ng=32, Ns=160, mode=label_mode))
    assert list(np.flatnonzero(label.t)) == list(range(29, 36))


@pytest.mark.parametrize("d, D, value", [
    (1, 5, 1), (3, 5, 3), (5, 5, 1),
    (2, 4, 2), (3, 4, 2),
    (1, 1, 1),
])
def test_zeta(d, D, value):
    assert zeta(d, D) == value


@pytest.mark.parametrize("d, D", [(0, 5), (6, 5)])
def test_zeta_out_of_range(d, D):
    with pytest.raises(InvalidLabelSpec):
        zeta(d, D)


@pytest.mark.parametrize("theta, tau_L, Ng, mu", [
    (0, 28, 32, 30),
    (10, 27, 32, 40),
    (0, 32, 32, 32),
    (0, 0, 32, 16),
])
def test_midpoint(theta, tau_L, Ng, mu):
    assert midpoint(theta, tau_L, Ng) == mu


@pytest.mark.parametrize("kwargs", [
    dict(theta=0, tau_L=0, Ng=32, Ns=160),
    dict(theta=0, tau_L=33, Ng=32, Ns=160),
    dict(theta=-1, tau_L=28, Ng=32, Ns=160),
    dict(theta=128, tau_L=28, Ng=32, Ns=160),
])
def test_bad_label_spec(kwargs):
    with pytest.raises(InvalidLabelSpec):
        LabelSpec(**kwargs)


def test_isi_region_mask():
    mask = isi_region_mask(theta=2, tau_L=3, Ng=5, Ns=12)
    assert list(np.flatnonzero(~mask)) == [5, 6, 7]


@pytest.mark.parametrize("theta, tau_L", [(0, 1), (2, 3), (10, 8), (15, 7)])
def test_rectangular_label_is_the_isi_free_indicator(theta, tau_L):
    label = build_label(LabelSpec(theta=theta, tau_L=tau_L, Ng=8, Ns=24, mode=LabelMode.RECTANGULAR))
    mask = isi_region_mask(theta, tau_L, 8, 24)
    assert label.t.dtype == np.float64
    assert np.array_equal(label.t == 0.0, mask)
    assert set(label.t[~mask]) == {1.0}


def test_narrowed_region():
    assert narrowed_region(10, LosPrior(28), 32) == (38, 41)


@pytest.mark.parametrize("los_ratio, Ng, expected", [
    (28, 32, (24, 28)),
    (16, 32, (1, 16)),
    (15, 32, (1, 15)),
    (7, 8, (6, 7)),
    (3, 8, (1, 3)),
])
def test_tau_L_range(los_ratio, Ng, expected):
    assert tau_L_range(LosPrior(los_ratio), Ng) == expected


@pytest.mark.parametrize("los_ratio", [0, 32, 40, -3])
def test_prior_violation(los_ratio):
    with pytest.raises(PriorViolation):
        tau_L_range(LosPrior(los_ratio), 32)


def test_sample_tau_L_law():
    rng = np.random.default_rng(7)
    draws = np.array([sample_tau_L(LosPrior(28), 32, rng) for _ in range(100_000)])
    assert draws.min() == 24
    assert draws.max() == 28
    for value in range(24, 29):
        assert np.mean(draws == value) == pytest.approx(0.2, abs=0.02)


@pytest.mark.parametrize("los_ratio", range(1, 31))
def test_midpoint_inside_narrowed_region(los_ratio):
    Ng = 32
    prior = LosPrior(los_ratio)
    low, high = tau_L_range(prior, Ng)
    first, last = narrowed_region(0, prior, Ng)
    for tau_L in range(low, high + 1):
        assert first <= midpoint(0, tau_L, Ng) <= last


def test_zeta_is_symmetric():
    for D in range(1, 65):
        values = [zeta(d, D) for d in range(1, D + 1)]
        assert values == values[::-1]
