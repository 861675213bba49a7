"""
The offline training pipeline: generate (Q, t) pairs, store them, train on them.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import struct
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from ofdm_timesync import network
from ofdm_timesync.channel import assemble_frame, draw_realization, exp_decay_profile, observe
from ofdm_timesync.correlator import DegenerateMetric, FeatureVector, normalize, timing_metric
from ofdm_timesync.labels import LabelMode, LabelSpec, LosPrior, TimingLabel, build_label, sample_tau_L
from ofdm_timesync.signals import local_sequence, training_symbol
from ofdm_timesync.types import OfdmConfig, TrainingParams
from ofdm_timesync.utils import derive_rng

logger = logging.getLogger(__name__)

# The SNRs training frames are drawn from, each with probability 1/7.
TRAINING_SNR_DB = (-2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0)

# Training channels draw their decay factor uniformly from this range.
ETA_RANGE = (0.01, 0.5)

DATASET_MAGIC = b"OTSD"
DATASET_VERSION = 1
_DATASET_HEADER = struct.Struct("<4sHIIIIQB")
_LABEL_MODE_CODES = {LabelMode.TRIANGULAR: 0, LabelMode.RECTANGULAR: 1}

# Columns of the metadata block.
META_FIELDS = ("theta", "tau_L_true", "tau_L_label", "snr_db", "eta", "cfo")


class DatasetFormatError(ValueError):
    """Raised when a dataset file is corrupt or was made for other frame dimensions."""

class SampleGenerationFailed(RuntimeError):
    """Raised when a usable frame couldn't be drawn within the retry budget."""

class TrainingDiverged(RuntimeError):
    """Raised when the training loss stops being finite."""

    def __init__(self, message, epoch: int, step: int, last_finite_loss: Optional[float]):
        super().__init__(f"{message} (epoch {epoch}, step {step}, last finite loss {last_finite_loss})")
        self.epoch = epoch
        self.step = step
        self.last_finite_loss = last_finite_loss


@dataclasses.dataclass(frozen=True)
class SampleMeta:
    """How a training sample was made."""
    theta: int
    tau_L_true: int
    tau_L_label: int
    snr_db: float
    eta: float
    cfo: float = 0.0

    def as_row(self) -> Tuple[float, ...]:
        return tuple(float(getattr(self, name)) for name in META_FIELDS)

    @classmethod
    def from_row(cls, row) -> SampleMeta:
        theta, tau_true, tau_label, snr_db, eta, cfo = (float(v) for v in row)
        return cls(int(theta), int(tau_true), int(tau_label), snr_db, eta, cfo)


@dataclasses.dataclass(frozen=True, eq=False)
class TrainingSample:
    """One (Q, t) pair and where it came from."""
    q: FeatureVector
    t: TimingLabel
    meta: SampleMeta


@dataclasses.dataclass(frozen=True)
class DatasetHeader:
    """What a dataset file says about itself."""
    N: int
    Ng: int
    Ns: int
    count: int
    seed: int
    label_mode: LabelMode = LabelMode.TRIANGULAR
    version: int = DATASET_VERSION

    def __post_init__(self):
        if self.count < 1:
            raise DatasetFormatError(f"A dataset needs at least one sample, got {self.count}")

    def check_config(self, config: OfdmConfig) -> None:
        mine = (self.N, self.Ng, self.Ns)
        theirs = (config.N, config.Ng, config.Ns)
        if mine != theirs:
            raise DatasetFormatError(f"Dataset was made for (N, Ng, Ns)={mine}, config has {theirs}")


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    """Samples stored column-wise: inputs and targets are count×Ns, meta count×6."""
    header: DatasetHeader
    inputs: np.ndarray
    targets: np.ndarray
    meta: np.ndarray

    def __len__(self):
        return self.header.count

    def sample(self, i: int) -> TrainingSample:
        meta = SampleMeta.from_row(self.meta[i])
        spec = LabelSpec(meta.theta, meta.tau_L_label, self.header.Ng, self.header.Ns, self.header.label_mode)
        return TrainingSample(
            q=FeatureVector(q=self.inputs[i]),
            t=TimingLabel(t=self.targets[i], spec=spec),
            meta=meta,
        )

    def samples(self) -> Iterator[TrainingSample]:
        for i in range(len(self)):
            yield self.sample(i)

    def batch(self, indices) -> network.Batch:
        return network.Batch(inputs=self.inputs[indices], targets=self.targets[indices])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.header == other.header
            and np.array_equal(self.inputs, other.inputs)
            and np.array_equal(self.targets, other.targets)
            and np.array_equal(self.meta, other.meta)
        )


def generate_sample(
        config: OfdmConfig,
        prior: LosPrior,
        rng: np.random.Generator,
        cfo: float = 0.0,
        label_mode: LabelMode = LabelMode.TRIANGULAR,
        max_redraws: int = 10,
    ) -> TrainingSample:
    """
    Draw one training pair.

    τ_L comes from the LOS prior and also sets the channel, L = τ_L + 1 taps
    at delays 0..τ_L, so the label is right by construction.
    """
    prior.check(config.Ng)
    symbol = training_symbol(config)
    x = local_sequence(config)
    for _ in range(max_redraws + 1):
        eta = float(rng.uniform(*ETA_RANGE))
        tau_L = sample_tau_L(prior, config.Ng, rng)
        profile = exp_decay_profile(tau_L + 1, eta)
        snr_db = float(rng.choice(TRAINING_SNR_DB))
        theta = int(rng.integers(0, config.max_theta, endpoint=True))
        realization = draw_realization(profile, theta, cfo, snr_db, rng, config=config)
        stream = assemble_frame(config, symbol, theta, rng)
        frame = observe(stream, realization, config, rng)
        try:
            q = normalize(timing_metric(frame.y, x))
        except DegenerateMetric:
            logger.debug("Degenerate timing metric, redrawing the frame")
            continue
        label = build_label(LabelSpec(theta, tau_L, config.Ng, config.Ns, label_mode))
        meta = SampleMeta(theta=theta, tau_L_true=tau_L, tau_L_label=tau_L, snr_db=snr_db, eta=eta, cfo=cfo)
        return TrainingSample(q=q, t=label, meta=meta)
    raise SampleGenerationFailed(f"No usable frame after {max_redraws + 1} draws")


def generate_dataset(
        config: OfdmConfig,
        prior: LosPrior,
        N_t: int,
        seed: int,
        cfo: float = 0.0,
        label_mode: LabelMode = LabelMode.TRIANGULAR,
        max_redraws: int = 10,
    ) -> Dataset:
    """
    N_t independent samples.  Sample i uses its own stream derived from
    (seed, i), so the result doesn't depend on how the work is split up.
    """
    if N_t < 1:
        raise ValueError(f"N_t must be at least 1, got {N_t}")
    label_mode = LabelMode(label_mode)
    inputs = np.empty((N_t, config.Ns))
    targets = np.empty((N_t, config.Ns))
    meta = np.empty((N_t, len(META_FIELDS)))
    report_every = max(1, N_t // 10)
    for i in range(N_t):
        sample = generate_sample(
            config, prior, derive_rng(seed, "sample", i),
            cfo=cfo, label_mode=label_mode, max_redraws=max_redraws,
        )
        inputs[i] = sample.q.q
        targets[i] = sample.t.t
        meta[i] = sample.meta.as_row()
        if (i + 1) % report_every == 0:
            logger.info(f"Generated {i + 1}/{N_t} samples")
    header = DatasetHeader(
        N=config.N, Ng=config.Ng, Ns=config.Ns, count=N_t, seed=seed, label_mode=label_mode,
    )
    return Dataset(header=header, inputs=inputs, targets=targets, meta=meta)


def save_dataset(dataset: Dataset, file: Union[str, Path]) -> None:
    """Write a header, then the Q, t and metadata blocks as little-endian float64."""
    h = dataset.header
    if not 0 <= h.seed < 2 ** 64:
        raise DatasetFormatError(f"Seed {h.seed} doesn't fit the file header")
    parts = [
        _DATASET_HEADER.pack(
            DATASET_MAGIC, h.version, h.N, h.Ng, h.Ns, h.count, h.seed, _LABEL_MODE_CODES[h.label_mode],
        ),
        np.ascontiguousarray(dataset.inputs, dtype="<f8").tobytes(),
        np.ascontiguousarray(dataset.targets, dtype="<f8").tobytes(),
        np.ascontiguousarray(dataset.meta, dtype="<f8").tobytes(),
    ]
    Path(file).write_bytes(b"".join(parts))
    logger.info(f"Wrote {h.count} samples to {file}")


def load_dataset(file: Union[str, Path], config: Optional[OfdmConfig] = None) -> Dataset:
    """Read a dataset written by `save_dataset`."""
    try:
        data = Path(file).read_bytes()
    except OSError as exc:
        raise DatasetFormatError(f"Can't read dataset {str(file)!r}: {exc}") from exc
    if len(data) < _DATASET_HEADER.size:
        raise DatasetFormatError(f"Dataset file {str(file)!r} is truncated")
    magic, version, N, Ng, Ns, count, seed, mode_code = _DATASET_HEADER.unpack_from(data)
    if magic != DATASET_MAGIC:
        raise DatasetFormatError(f"{str(file)!r} is not a dataset file")
    if version != DATASET_VERSION:
        raise DatasetFormatError(f"Dataset format version {version} is not supported")
    modes = {code: mode for mode, code in _LABEL_MODE_CODES.items()}
    if mode_code not in modes:
        raise DatasetFormatError(f"Unknown label mode code {mode_code}")
    header = DatasetHeader(N=N, Ng=Ng, Ns=Ns, count=count, seed=seed, label_mode=modes[mode_code], version=version)
    if config is not None:
        header.check_config(config)

    widths = (Ns, Ns, len(META_FIELDS))
    expected = _DATASET_HEADER.size + 8 * count * sum(widths)
    if len(data) != expected:
        raise DatasetFormatError(f"Dataset file has {len(data)} bytes, header says {expected}")
    blocks = []
    offset = _DATASET_HEADER.size
    for width in widths:
        flat = np.frombuffer(data, dtype="<f8", count=count * width, offset=offset)
        blocks.append(flat.astype(np.float64).reshape(count, width))
        offset += 8 * count * width
    return Dataset(header=header, inputs=blocks[0], targets=blocks[1], meta=blocks[2])


@dataclasses.dataclass(frozen=True)
class EpochLoss:
    """Losses after an epoch.  Epoch 0 is the untrained model."""
    epoch: int
    train_loss: float
    validation_loss: Optional[float]


@dataclasses.dataclass(frozen=True)
class TrainingResult:
    """The kept model, and how training went."""
    model: network.Mlp
    trace: List[EpochLoss]
    best_epoch: int
    steps: int


def _split(n: int, fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    order = derive_rng(seed, "split").permutation(n)
    n_val = int(round(n * fraction))
    if n_val >= n:
        n_val = 0
    return order[n_val:], order[:n_val]


def train_pipeline(dataset: Dataset, hyperparams: TrainingParams, seed: int) -> TrainingResult:
    """
    Train a fresh network on `dataset` with mini-batch SGD.

    A held-out fraction is used for early stopping: training ends when the
    validation loss hasn't improved for `patience` epochs, and the model
    from the best epoch is returned.  Without a validation split the
    training loss is monitored instead.
    """
    h = dataset.header
    train_idx, val_idx = _split(len(dataset), hyperparams.validation_fraction, seed)
    train_batch = dataset.batch(np.sort(train_idx))
    val_batch = dataset.batch(np.sort(val_idx)) if len(val_idx) else None

    state = network.TrainState(
        model=network.init_layers(h.Ns, h.N, h.Ns, seed),
        learning_rate=hyperparams.learning_rate,
        lr_decay=hyperparams.lr_decay,
        lr_decay_every=hyperparams.lr_decay_every,
    )

    def losses(model) -> EpochLoss:
        return EpochLoss(
            epoch=0,
            train_loss=network.loss(model, train_batch),
            validation_loss=network.loss(model, val_batch) if val_batch is not None else None,
        )

    first = losses(state.model)
    trace = [first]
    best_model, best_epoch = state.model, 0
    best_value = first.validation_loss if val_batch is not None else first.train_loss
    last_finite = first.train_loss
    stale = 0
    logger.info(
        f"Training on {len(train_idx)} samples, validating on {len(val_idx)}, "
        f"{hyperparams.epochs} epochs max, batch {hyperparams.batch_size}, rate {hyperparams.learning_rate}"
    )

    for epoch in range(1, hyperparams.epochs + 1):
        order = derive_rng(seed, "shuffle", epoch).permutation(train_idx)
        for start in range(0, len(order), hyperparams.batch_size):
            batch = dataset.batch(order[start:start + hyperparams.batch_size])
            state = network.sgd_step(state, batch, epoch=epoch - 1)

        record = dataclasses.replace(losses(state.model), epoch=epoch)
        values = [record.train_loss] + ([record.validation_loss] if record.validation_loss is not None else [])
        if not all(math.isfinite(v) for v in values):
            raise TrainingDiverged("Training loss is no longer finite", epoch, state.step, last_finite)
        last_finite = record.train_loss
        trace.append(record)
        logger.info(f"Epoch {epoch}: train loss {record.train_loss:.6f}, validation loss {record.validation_loss}")

        monitored = record.validation_loss if record.validation_loss is not None else record.train_loss
        if monitored < best_value:
            best_value, best_model, best_epoch = monitored, state.model, epoch
            stale = 0
        else:
            stale += 1
            if stale >= hyperparams.patience:
                logger.info(f"No improvement for {stale} epochs, stopping after epoch {epoch}")
                break

    return TrainingResult(model=best_model, trace=trace, best_epoch=best_epoch, steps=state.step)
