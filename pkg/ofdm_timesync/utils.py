"""
Generic utilities.
"""

import hashlib
from importlib import resources

import cachetools.func
import numpy as np


def derive_seed(*keys) -> int:
    """
    Derive a 64-bit seed from a tuple of keys.

    The keys are hashed, so nearby keys give unrelated seeds, and a stream
    depends only on its own keys, never on the order streams are created in.
    """
    text = "\x1f".join(repr(k) for k in keys)
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_rng(*keys) -> np.random.Generator:
    """A numpy Generator seeded from `keys`, see `derive_seed`."""
    return np.random.default_rng(derive_seed(*keys))


def snr_key(snr_db: float) -> str:
    """A stable key for an SNR value, so 6 and 6.0 seed the same stream."""
    return f"{float(snr_db):.6f}"


# A list of all the memoized functions, so that `clear_memoized_values` can
# clear them all.
_memoized_functions = []

def memoize(func):
    """Cache the value returned by a function call."""
    func = cachetools.func.lru_cache(maxsize=256)(func)
    _memoized_functions.append(func)
    return func

def clear_memoized_values():
    """Clear all the values saved by @memoize, to ensure isolated tests."""
    for func in _memoized_functions:
        func.cache_clear()


def read_package_text(filename: str) -> str:
    """Read a data file shipped inside ofdm_timesync/data."""
    return resources.files("ofdm_timesync").joinpath("data", filename).read_text()
