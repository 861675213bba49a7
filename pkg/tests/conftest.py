"""Automatically run by pytest to set up test infrastructure."""

import numpy as np
import pytest

import ofdm_timesync.utils
from ofdm_timesync.config import load_config
from ofdm_timesync.labels import LabelMode
from ofdm_timesync.types import OfdmConfig

from . import settings as test_settings


@pytest.fixture(autouse=True)
def settings_for_tests(mocker):
    for name, value in vars(test_settings).items():
        if name.isupper():
            mocker.patch(f"ofdm_timesync.settings.{name}", value)


@pytest.fixture(autouse=True)
def reset_all_memoized_functions():
    """Clears the values cached by @memoize before each test. Applied automatically."""
    ofdm_timesync.utils.clear_memoized_values()


@pytest.fixture
def run_config():
    """The toy run configuration: N=16, Ng=8."""
    return load_config("testing")


@pytest.fixture
def small_config(run_config):
    return run_config.ofdm


@pytest.fixture
def full_config():
    """The published frame: N=128, Ng=32."""
    return OfdmConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=[
    pytest.param(LabelMode.TRIANGULAR, id="label:triangular"),
    pytest.param(LabelMode.RECTANGULAR, id="label:rectangular"),
])
def label_mode(request):
    """Makes tests try both label shapes."""
    return request.param
