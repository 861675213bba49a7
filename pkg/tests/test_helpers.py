"""Tests of the helpers in tests/helpers.py"""

import numpy as np
import pytest

from .helpers import label_by_index, relative_error, unit_vectors


@pytest.mark.parametrize("tau_L, Ng, expected", [
    (28, 32, [1, 2, 3, 2, 1]),
    (29, 32, [1, 2, 2, 1]),
    (32, 32, [1]),
    (31, 32, [1, 1]),
])
def test_label_by_index(tau_L, Ng, expected):
    t = label_by_index(0, tau_L, Ng, 40)
    assert list(t[tau_L:Ng + 1]) == expected
    assert t.sum() == sum(expected)


def test_unit_vectors(rng):
    v = unit_vectors(rng, 5, 7)
    assert v.shape == (5, 7)
    assert np.allclose(np.linalg.norm(v, axis=1), 1.0)


def test_relative_error():
    assert relative_error([1.0, 2.0], [1.0, 2.0]) == 0
    assert relative_error([1.0, 0.0], [0.0, 1.0]) == pytest.approx(np.sqrt(2))
