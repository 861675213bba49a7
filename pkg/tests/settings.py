"""Made-up settings to use during tests."""

# These should be in the in-memory form ready to patch into ofdm_timesync.settings

CONFIG = "testing"
DEFAULT_SEED = 1234
OUTPUT_DIR = "."
