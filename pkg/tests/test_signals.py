"""Tests of signals.py"""

import numpy as np
import pytest

from ofdm_timesync.signals import (
    DimensionError,
    InvalidCyclicPrefix,
    InvalidRoot,
    add_cp,
    local_sequence,
    modulate,
    random_data_symbol,
    training_symbol,
    zadoff_chu,
)


def test_zadoff_chu_even_length():
    d = zadoff_chu(128, 25)
    k = np.arange(128)
    assert np.allclose(d, np.exp(-1j * np.pi * 25 * k ** 2 / 128))


def test_zadoff_chu_odd_length():
    d = zadoff_chu(63, 5)
    k = np.arange(63)
    assert np.allclose(d, np.exp(-1j * np.pi * 5 * k * (k + 1) / 63))


@pytest.mark.parametrize("N, u", [(128, 25), (16, 3), (96, 25), (160, 27), (63, 5)])
def test_zadoff_chu_is_cazac(N, u):
    d = zadoff_chu(N, u)
    assert np.allclose(np.abs(d), 1.0)
    for shift in range(1, N):
        assert abs(np.vdot(d, np.roll(d, shift))) < 1e-8


@pytest.mark.parametrize("N, u", [(128, 2), (160, 25), (16, 4)])
def test_zadoff_chu_bad_root(N, u):
    with pytest.raises(InvalidRoot):
        zadoff_chu(N, u)


def test_zadoff_chu_bad_length():
    with pytest.raises(DimensionError):
        zadoff_chu(0, 1)


def test_modulate_is_unit_power_ifft():
    d = zadoff_chu(128, 25)
    body = modulate(d)
    assert np.allclose(body, np.fft.ifft(d) * np.sqrt(128))
    assert np.mean(np.abs(body) ** 2) == pytest.approx(1.0)


def test_modulate_rejects_empty():
    with pytest.raises(DimensionError):
        modulate([])


def test_add_cp():
    body = np.arange(8) + 0j
    with_cp = add_cp(body, 3)
    assert list(with_cp.real) == [5, 6, 7, 0, 1, 2, 3, 4, 5, 6, 7]
    assert np.array_equal(add_cp(body, 0), body)


@pytest.mark.parametrize("Ng", [8, 9, -1])
def test_add_cp_too_long(Ng):
    with pytest.raises(InvalidCyclicPrefix):
        add_cp(np.ones(8), Ng)


def test_training_symbol(full_config):
    symbol = training_symbol(full_config)
    assert symbol.N == 128
    assert symbol.Ng == 32
    assert len(symbol.with_cp) == 160
    assert np.array_equal(symbol.with_cp[:32], symbol.body[-32:])
    assert np.array_equal(local_sequence(full_config), symbol.body)


def test_training_symbol_is_read_only(small_config):
    symbol = training_symbol(small_config)
    with pytest.raises(ValueError):
        symbol.body[0] = 0


def test_training_symbol_is_memoized(small_config):
    assert training_symbol(small_config) is training_symbol(small_config)


def test_random_data_symbol(small_config, rng):
    symbol = random_data_symbol(small_config, rng)
    assert len(symbol) == small_config.N + small_config.Ng
    freq = np.fft.fft(symbol[small_config.Ng:], norm="ortho")
    assert np.allclose(np.abs(freq), 1.0)
