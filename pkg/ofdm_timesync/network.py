"""
The timing network: Ns inputs, N sigmoid hidden units, Ns linear outputs.

Trained by plain SGD on the mean squared ℓ2 distance to the label, and
deployed by taking the argmax of the absolute output.
"""

from __future__ import annotations

import dataclasses
import math
import struct
from pathlib import Path
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from ofdm_timesync.correlator import FeatureVector, first_argmax
from ofdm_timesync.labels import TimingLabel
from ofdm_timesync.signals import DimensionError
from ofdm_timesync.types import OfdmConfig, RealVector
from ofdm_timesync.utils import derive_rng

MODEL_MAGIC = b"OTSM"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<4sHIII")

# How far an input's ℓ2 norm may stray from 1.
NORM_TOLERANCE = 1e-6


class EmptyBatch(ValueError):
    """Raised when a loss or gradient is asked of an empty batch."""

class PreconditionError(ValueError):
    """Raised when a network input isn't ℓ2-normalized."""

class ModelFormatError(ValueError):
    """Raised when a model file is corrupt or doesn't match the expected dimensions."""


@dataclasses.dataclass(frozen=True, eq=False)
class Mlp:
    """Weights and biases.  w1 is hidden×inputs, w2 is outputs×hidden."""
    w1: RealVector
    b1: RealVector
    w2: RealVector
    b2: RealVector

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            array = np.array(getattr(self, name), dtype=np.float64)
            array.flags.writeable = False
            object.__setattr__(self, name, array)
        hidden, _ = self.w1.shape
        n_out, hidden2 = self.w2.shape
        if hidden2 != hidden or self.b1.shape != (hidden,) or self.b2.shape != (n_out,):
            raise DimensionError(
                f"Inconsistent layer shapes: w1 {self.w1.shape}, b1 {self.b1.shape}, "
                f"w2 {self.w2.shape}, b2 {self.b2.shape}"
            )

    @property
    def dims(self) -> Tuple[int, int, int]:
        """(inputs, hidden, outputs)."""
        return self.w1.shape[1], self.w1.shape[0], self.w2.shape[0]

    def arrays(self) -> Tuple[RealVector, ...]:
        return self.w1, self.b1, self.w2, self.b2

    def check_config(self, config: OfdmConfig) -> None:
        """Raise DimensionError unless the layers are Ns→N→Ns for `config`."""
        expected = (config.Ns, config.N, config.Ns)
        if self.dims != expected:
            raise DimensionError(f"Model is {self.dims}, config needs {expected}")

    def __eq__(self, other):
        if not isinstance(other, Mlp):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays()))


@dataclasses.dataclass(frozen=True)
class Gradients:
    """∂loss/∂parameter for each parameter of an Mlp."""
    w1: RealVector
    b1: RealVector
    w2: RealVector
    b2: RealVector

    def arrays(self) -> Tuple[RealVector, ...]:
        return self.w1, self.b1, self.w2, self.b2


@dataclasses.dataclass(frozen=True)
class TrainState:
    """A model part-way through SGD."""
    model: Mlp
    learning_rate: float
    step: int = 0
    # Step-decay schedule, off by default.
    lr_decay: float = 1.0
    lr_decay_every: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be nonnegative, got {self.learning_rate}")

    def rate_for_epoch(self, epoch: int) -> float:
        """The learning rate in effect during `epoch` (0-based)."""
        if self.lr_decay_every <= 0:
            return self.learning_rate
        return self.learning_rate * self.lr_decay ** (epoch // self.lr_decay_every)


@dataclasses.dataclass(frozen=True, eq=False)
class NetworkOutput:
    """The network output O, one value per window start."""
    o: RealVector


@dataclasses.dataclass(frozen=True, eq=False)
class Batch:
    """Inputs and targets stacked row-wise."""
    inputs: RealVector
    targets: RealVector

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.inputs.shape != self.targets.shape:
            raise DimensionError(f"Batch inputs {self.inputs.shape} don't match targets {self.targets.shape}")

    def __len__(self):
        return self.inputs.shape[0]


VectorLike = Union[FeatureVector, TimingLabel, NetworkOutput, np.ndarray]


def _as_vector(value: VectorLike) -> np.ndarray:
    if isinstance(value, FeatureVector):
        value = value.q
    elif isinstance(value, TimingLabel):
        value = value.t
    elif isinstance(value, NetworkOutput):
        value = value.o
    return np.asarray(value, dtype=np.float64)


def make_batch(pairs: Iterable[Tuple[VectorLike, VectorLike]]) -> Batch:
    """Stack (q, t) pairs into a Batch."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyBatch("A batch needs at least one (q, t) pair")
    inputs = np.stack([_as_vector(q) for q, _ in pairs])
    targets = np.stack([_as_vector(t) for _, t in pairs])
    return Batch(inputs=inputs, targets=targets)


def _check_inputs(model: Mlp, inputs: np.ndarray) -> None:
    n_in = model.dims[0]
    if inputs.shape[-1] != n_in:
        raise DimensionError(f"Model takes {n_in} inputs, got {inputs.shape[-1]}")
    norms = np.linalg.norm(inputs, axis=-1)
    if np.any(np.abs(norms - 1.0) > NORM_TOLERANCE):
        raise PreconditionError(f"Network inputs must have unit ℓ2 norm, got norms {np.atleast_1d(norms)[:4]}")


def init_layers(n_in: int, n_hidden: int, n_out: int, seed: int) -> Mlp:
    """
    Weights uniform on ±1/√fan_in per layer, biases zero.
    """
    rng = derive_rng(seed, "init")
    bound1 = 1 / math.sqrt(n_in)
    bound2 = 1 / math.sqrt(n_hidden)
    return Mlp(
        w1=rng.uniform(-bound1, bound1, size=(n_hidden, n_in)),
        b1=np.zeros(n_hidden),
        w2=rng.uniform(-bound2, bound2, size=(n_out, n_hidden)),
        b2=np.zeros(n_out),
    )


def init(config: OfdmConfig, seed: int) -> Mlp:
    """A fresh Ns→N→Ns network."""
    return init_layers(config.Ns, config.N, config.Ns, seed)


def _activations(model: Mlp, inputs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    hidden = expit(inputs @ model.w1.T + model.b1)
    return hidden, hidden @ model.w2.T + model.b2


def forward(model: Mlp, q: VectorLike) -> NetworkOutput:
    """O = w2·σ(w1·q + b1) + b2."""
    inputs = _as_vector(q)
    _check_inputs(model, inputs)
    _, output = _activations(model, inputs)
    return NetworkOutput(o=output)


def _as_batch(batch) -> Batch:
    if isinstance(batch, Batch):
        if len(batch) == 0:
            raise EmptyBatch("A batch needs at least one (q, t) pair")
        return batch
    return make_batch(batch)


def loss(model: Mlp, batch) -> float:
    """Mean over the batch of ‖G(q) − t‖₂²."""
    batch = _as_batch(batch)
    _check_inputs(model, batch.inputs)
    _, output = _activations(model, batch.inputs)
    return float(np.mean(np.sum((output - batch.targets) ** 2, axis=1)))


def backward(model: Mlp, batch) -> Gradients:
    """Exact gradients of `loss` with respect to every parameter."""
    batch = _as_batch(batch)
    _check_inputs(model, batch.inputs)
    hidden, output = _activations(model, batch.inputs)
    d_output = 2.0 * (output - batch.targets) / len(batch)
    d_hidden = (d_output @ model.w2) * hidden * (1.0 - hidden)
    return Gradients(
        w1=d_hidden.T @ batch.inputs,
        b1=d_hidden.sum(axis=0),
        w2=d_output.T @ hidden,
        b2=d_output.sum(axis=0),
    )


def apply_gradients(model: Mlp, grads: Gradients, rate: float) -> Mlp:
    """Θ − rate·∇."""
    return Mlp(*(p - rate * g for p, g in zip(model.arrays(), grads.arrays())))


def sgd_step(state: TrainState, batch, epoch: int = 0) -> TrainState:
    """One SGD update, Θ ← Θ − α∇L."""
    grads = backward(state.model, batch)
    model = apply_gradients(state.model, grads, state.rate_for_epoch(epoch))
    return dataclasses.replace(state, model=model, step=state.step + 1)


def estimate(o: VectorLike) -> int:
    """θ̂ = argmax_m |O(m)|, ties to the smallest index."""
    return first_argmax(np.abs(_as_vector(o)))


def save_model(model: Mlp, file: Union[str, Path]) -> None:
    """Write a model as a header and raw little-endian float64 parameters."""
    n_in, n_hidden, n_out = model.dims
    parts = [_MODEL_HEADER.pack(MODEL_MAGIC, MODEL_VERSION, n_in, n_hidden, n_out)]
    parts.extend(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in model.arrays())
    Path(file).write_bytes(b"".join(parts))


def load_model(file: Union[str, Path], config: Optional[OfdmConfig] = None) -> Mlp:
    """Read a model written by `save_model`, checking dims against `config` if given."""
    try:
        data = Path(file).read_bytes()
    except OSError as exc:
        raise ModelFormatError(f"Can't read model {str(file)!r}: {exc}") from exc
    if len(data) < _MODEL_HEADER.size:
        raise ModelFormatError(f"Model file {str(file)!r} is truncated")
    magic, version, n_in, n_hidden, n_out = _MODEL_HEADER.unpack_from(data)
    if magic != MODEL_MAGIC:
        raise ModelFormatError(f"{str(file)!r} is not a model file")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"Model format version {version} is not supported")
    shapes = [(n_hidden, n_in), (n_hidden,), (n_out, n_hidden), (n_out,)]
    sizes = [int(np.prod(s)) for s in shapes]
    expected = _MODEL_HEADER.size + 8 * sum(sizes)
    if len(data) != expected:
        raise ModelFormatError(f"Model file has {len(data)} bytes, expected {expected}")
    arrays = []
    offset = _MODEL_HEADER.size
    for shape, size in zip(shapes, sizes):
        flat = np.frombuffer(data, dtype="<f8", count=size, offset=offset)
        arrays.append(flat.astype(np.float64).reshape(shape))
        offset += 8 * size
    model = Mlp(*arrays)
    if config is not None:
        try:
            model.check_config(config)
        except DimensionError as exc:
            raise ModelFormatError(str(exc)) from exc
    return model
