"""Settings for how runs should behave, read from the environment."""

import os


def read_int_setting(setting_name: str, default: int) -> int:
    """Read an integer setting, falling back to `default` if it's missing."""
    value = os.environ.get(setting_name, None)
    if value is None:
        return default
    return int(value)


# Either a config class nickname ("default", "development", "testing") or the
# path of a YAML config file.
CONFIG = os.environ.get("OFDM_TIMESYNC_CONFIG", "default")

# The master seed used when a command isn't given --seed.
DEFAULT_SEED = read_int_setting("OFDM_TIMESYNC_SEED", 0)

# Where commands write their output when not given --out.
OUTPUT_DIR = os.environ.get("OFDM_TIMESYNC_OUTPUT_DIR", ".")
