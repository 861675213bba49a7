"""
Named run configurations, and YAML config files layered on top of them.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, Dict

import yaml
from glom import glom

from ofdm_timesync.types import (
    EvaluationParams,
    InvalidConfig,
    OfdmConfig,
    RunConfig,
    TrainingParams,
    default_los_ratio,
)

logger = logging.getLogger(__name__)


class DefaultConfig:
    """The parameters of the published experiments."""
    N = 128
    Ng = 32
    ZC_ROOT = 25
    # None means ⌈7·Ng/8⌉.
    LOS_RATIO = None

    TRAINING_SAMPLES = 10_000
    EPOCHS = 100
    BATCH_SIZE = 32
    LEARNING_RATE = 0.001
    PATIENCE = 10
    VALIDATION_FRACTION = 0.1
    LR_DECAY = 1.0
    LR_DECAY_EVERY = 0
    TRAINING_CFO = 0.0
    LABEL_MODE = "triangular"
    MAX_REDRAWS = 10

    TRIALS = 2000
    SNR_DB = (-2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    EVALUATION_CFO = 0.0


class DevelopmentConfig(DefaultConfig):
    """Full-size frames, small runs."""
    TRAINING_SAMPLES = 1000
    EPOCHS = 20
    TRIALS = 200


class TestingConfig(DefaultConfig):
    """A toy frame that keeps the test suite fast."""
    N = 16
    Ng = 8
    ZC_ROOT = 3
    TRAINING_SAMPLES = 64
    EPOCHS = 5
    BATCH_SIZE = 8
    LEARNING_RATE = 0.01
    PATIENCE = 3
    TRIALS = 20
    SNR_DB = (0.0, 10.0)


# Keys allowed in a YAML config file, by section.  Values are
# (glom path, DefaultConfig attribute).
_FILE_KEYS: Dict[str, Dict[str, str]] = {
    "ofdm": {"N": "N", "Ng": "Ng", "zc_root": "ZC_ROOT"},
    "prior": {"los_ratio": "LOS_RATIO"},
    "training": {
        "samples": "TRAINING_SAMPLES",
        "epochs": "EPOCHS",
        "batch_size": "BATCH_SIZE",
        "learning_rate": "LEARNING_RATE",
        "patience": "PATIENCE",
        "validation_fraction": "VALIDATION_FRACTION",
        "lr_decay": "LR_DECAY",
        "lr_decay_every": "LR_DECAY_EVERY",
        "cfo": "TRAINING_CFO",
        "label_mode": "LABEL_MODE",
        "max_redraws": "MAX_REDRAWS",
    },
    "evaluation": {"trials": "TRIALS", "snr_db": "SNR_DB", "cfo": "EVALUATION_CFO"},
}


def expand_config(name=None):
    if not name:
        name = "default"
    return "{classname}Config".format(classname=name.capitalize())


def config_class(name=None) -> type:
    """Find a configuration class by its nickname."""
    class_name = expand_config(name)
    cls = globals().get(class_name)
    if not isinstance(cls, type) or not issubclass(cls, DefaultConfig):
        raise InvalidConfig(f"No configuration named {name!r}")
    return cls


def run_config_from_class(cls: Any) -> RunConfig:
    """Build a RunConfig from the attributes of a configuration class."""
    ofdm = OfdmConfig(N=int(cls.N), Ng=int(cls.Ng), zc_root=int(cls.ZC_ROOT))
    los_ratio = cls.LOS_RATIO if cls.LOS_RATIO is not None else default_los_ratio(ofdm.Ng)
    training = TrainingParams(
        samples=int(cls.TRAINING_SAMPLES),
        epochs=int(cls.EPOCHS),
        batch_size=int(cls.BATCH_SIZE),
        learning_rate=float(cls.LEARNING_RATE),
        patience=int(cls.PATIENCE),
        validation_fraction=float(cls.VALIDATION_FRACTION),
        lr_decay=float(cls.LR_DECAY),
        lr_decay_every=int(cls.LR_DECAY_EVERY),
        cfo=float(cls.TRAINING_CFO),
        label_mode=str(cls.LABEL_MODE),
        max_redraws=int(cls.MAX_REDRAWS),
    )
    evaluation = EvaluationParams(
        trials=int(cls.TRIALS),
        snr_db=tuple(float(s) for s in cls.SNR_DB),
        cfo=float(cls.EVALUATION_CFO),
    )
    return RunConfig(ofdm=ofdm, los_ratio=int(los_ratio), training=training, evaluation=evaluation)


def parse_config_data(data: Dict, base: Any = DefaultConfig) -> RunConfig:
    """
    Apply the values of a parsed YAML config over a configuration class.

    The file looks like this::

        ofdm:
          N: 128
          Ng: 32
          zc_root: 25
        prior:
          los_ratio: 28
        training:
          samples: 10000
          batch_size: 32
        evaluation:
          trials: 2000
          snr_db: [-2, 0, 2, 4, 6, 8, 10]

    Missing keys keep the value from `base`.  Nw and Ns are always derived.
    """
    data = data or {}
    if not isinstance(data, dict):
        raise InvalidConfig(f"A config file must be a mapping of sections, got {type(data).__name__}")
    unknown = set(data) - set(_FILE_KEYS)
    if unknown:
        raise InvalidConfig(f"Unknown config sections: {', '.join(sorted(unknown))}")
    overrides = {}
    for section, keys in _FILE_KEYS.items():
        values = glom(data, section, default=None) or {}
        if not isinstance(values, dict):
            raise InvalidConfig(f"Config section {section!r} must be a mapping, got {type(values).__name__}")
        unknown_keys = set(values) - set(keys)
        if unknown_keys:
            raise InvalidConfig(f"Unknown keys in {section!r}: {', '.join(sorted(unknown_keys))}")
        for key, attr in keys.items():
            value = glom(data, f"{section}.{key}", default=None)
            if value is not None:
                overrides[attr] = value

    if "N" in overrides and "ZC_ROOT" not in overrides and math.gcd(base.ZC_ROOT, int(overrides["N"])) != 1:
        raise InvalidConfig(f"N={overrides['N']} needs an explicit zc_root coprime with it")
    layered = type("FileConfig", (base,), overrides)
    return run_config_from_class(layered)


def load_config(name_or_path=None) -> RunConfig:
    """
    Get a RunConfig from a configuration nickname or a YAML file path.
    """
    name_or_path = name_or_path or "default"
    path = Path(name_or_path)
    if path.suffix in {".yaml", ".yml"} or path.exists():
        logger.debug(f"Reading config file {path}")
        try:
            data = yaml.safe_load(path.read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise InvalidConfig(f"Can't read config file {str(path)!r}: {exc}") from exc
        return parse_config_data(data)
    return run_config_from_class(config_class(name_or_path))
