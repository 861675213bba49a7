"""Tests of dataset.py"""

import dataclasses

import numpy as np
import pytest
from scipy import stats

from ofdm_timesync import network
from ofdm_timesync.config import load_config
from ofdm_timesync.correlator import DegenerateMetric, normalize
from ofdm_timesync.dataset import (
    DatasetFormatError,
    META_FIELDS,
    TRAINING_SNR_DB,
    EpochLoss,
    SampleGenerationFailed,
    TrainingDiverged,
    generate_dataset,
    generate_sample,
    load_dataset,
    save_dataset,
    train_pipeline,
)
from ofdm_timesync.labels import LabelMode, LosPrior, isi_free_region, tau_L_range
from ofdm_timesync.types import OfdmConfig, TrainingParams

from .helpers import label_by_index


@pytest.fixture
def prior(run_config):
    return LosPrior(run_config.los_ratio)


@pytest.fixture
def small_dataset(small_config, prior):
    return generate_dataset(small_config, prior, 40, seed=3)


def test_generate_sample(small_config, prior, rng, label_mode):
    low, high = tau_L_range(prior, small_config.Ng)
    for _ in range(30):
        sample = generate_sample(small_config, prior, rng, label_mode=label_mode)
        meta = sample.meta
        assert len(sample.q) == small_config.Ns
        assert np.linalg.norm(sample.q.q) == pytest.approx(1.0)
        assert low <= meta.tau_L_true == meta.tau_L_label <= high
        assert 0 <= meta.theta <= small_config.max_theta
        assert meta.snr_db in {-2, 0, 2, 4, 6, 8, 10}
        assert 0.01 <= meta.eta <= 0.5
        expected = label_by_index(
            meta.theta, meta.tau_L_label, small_config.Ng, small_config.Ns,
            rectangular=label_mode is LabelMode.RECTANGULAR,
        )
        assert np.array_equal(sample.t.t, expected)
        assert sample.t.spec.mode is label_mode


def test_generate_sample_redraws(small_config, prior, rng, mocker):
    calls = {"n": 0}
    def flaky_normalize(metric):
        calls["n"] += 1
        if calls["n"] < 3:
            raise DegenerateMetric("zero")
        return normalize(metric)
    mocker.patch("ofdm_timesync.dataset.normalize", flaky_normalize)
    sample = generate_sample(small_config, prior, rng, max_redraws=5)
    assert calls["n"] == 3
    assert len(sample.q) == small_config.Ns


def test_generate_sample_gives_up(small_config, prior, rng, mocker):
    mocker.patch("ofdm_timesync.dataset.normalize", side_effect=DegenerateMetric("zero"))
    with pytest.raises(SampleGenerationFailed):
        generate_sample(small_config, prior, rng, max_redraws=2)


def test_generate_dataset(small_dataset, small_config):
    assert len(small_dataset) == 40
    assert small_dataset.inputs.shape == (40, small_config.Ns)
    assert small_dataset.targets.shape == (40, small_config.Ns)
    assert small_dataset.meta.shape == (40, 6)
    header = small_dataset.header
    assert (header.N, header.Ng, header.Ns, header.seed) == (16, 8, 24, 3)
    for sample in small_dataset.samples():
        first, last = isi_free_region(sample.meta.theta, sample.meta.tau_L_label, small_config.Ng)
        assert set(np.flatnonzero(sample.t.t)) == set(range(first, last + 1))


def test_generate_dataset_is_deterministic(small_dataset, small_config, prior):
    assert generate_dataset(small_config, prior, 40, seed=3) == small_dataset
    assert generate_dataset(small_config, prior, 40, seed=4) != small_dataset


def test_generate_dataset_prefix_is_stable(small_dataset, small_config, prior):
    # Sample i only depends on (seed, i).
    shorter = generate_dataset(small_config, prior, 10, seed=3)
    assert np.array_equal(shorter.inputs, small_dataset.inputs[:10])
    assert np.array_equal(shorter.meta, small_dataset.meta[:10])


def test_generate_dataset_needs_samples(small_config, prior):
    with pytest.raises(ValueError):
        generate_dataset(small_config, prior, 0, seed=3)


@pytest.fixture(scope="module")
def many_samples():
    """Enough toy samples to check the laws the generator draws from."""
    run = load_config("testing")
    return generate_dataset(run.ofdm, LosPrior(run.los_ratio), 7000, seed=21)


def test_snr_is_uniform_over_training_snrs(many_samples):
    values, counts = np.unique(many_samples.meta[:, META_FIELDS.index("snr_db")], return_counts=True)
    assert list(values) == list(TRAINING_SNR_DB)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_tau_L_is_uniform_over_prior_range(many_samples):
    header = many_samples.header
    run = load_config("testing")
    low, high = tau_L_range(LosPrior(run.los_ratio), header.Ng)
    values, counts = np.unique(many_samples.meta[:, META_FIELDS.index("tau_L_label")], return_counts=True)
    assert list(values) == list(range(low, high + 1))
    assert stats.chisquare(counts).pvalue > 1e-3


@pytest.mark.slow
def test_snr_frequencies_over_many_samples():
    run = load_config("testing")
    dataset = generate_dataset(run.ofdm, LosPrior(run.los_ratio), 70_000, seed=22)
    snr = dataset.meta[:, META_FIELDS.index("snr_db")]
    for value in TRAINING_SNR_DB:
        assert np.mean(snr == value) == pytest.approx(1 / 7, abs=0.01)


def test_dataset_cannot_be_empty(small_dataset):
    # The header rejects a zero count, so train_pipeline never sees an empty dataset.
    with pytest.raises(DatasetFormatError, match="at least one sample"):
        dataclasses.replace(small_dataset.header, count=0)


def test_save_and_load(tmp_path, small_dataset, small_config):
    path = tmp_path / "data.otsd"
    save_dataset(small_dataset, path)
    assert load_dataset(path, config=small_config) == small_dataset


def test_save_and_load_rectangular(tmp_path, small_config, prior):
    dataset = generate_dataset(small_config, prior, 5, seed=1, label_mode=LabelMode.RECTANGULAR)
    path = tmp_path / "data.otsd"
    save_dataset(dataset, path)
    loaded = load_dataset(path)
    assert loaded.header.label_mode is LabelMode.RECTANGULAR
    assert set(np.unique(loaded.targets)) == {0.0, 1.0}


def test_load_for_another_frame(tmp_path, small_dataset):
    path = tmp_path / "data.otsd"
    save_dataset(small_dataset, path)
    with pytest.raises(DatasetFormatError, match="was made for"):
        load_dataset(path, config=OfdmConfig(N=32, Ng=8, zc_root=3))


@pytest.mark.parametrize("mangle, msg", [
    (lambda data: data[:-8], "header says"),
    (lambda data: b"OTSM" + data[4:], "not a dataset file"),
    (lambda data: data[:4] + b"\x07\x00" + data[6:], "version 7"),
    (lambda data: data[:30] + b"\x09" + data[31:], "label mode code 9"),
    (lambda data: data[:12], "truncated"),
])
def test_load_corrupt(tmp_path, small_dataset, mangle, msg):
    path = tmp_path / "data.otsd"
    save_dataset(small_dataset, path)
    path.write_bytes(mangle(path.read_bytes()))
    with pytest.raises(DatasetFormatError, match=msg):
        load_dataset(path)


def test_train_pipeline(small_dataset, run_config):
    result = train_pipeline(small_dataset, run_config.training, seed=2)
    assert result.trace[0].epoch == 0
    assert [e.epoch for e in result.trace] == list(range(len(result.trace)))
    assert len(result.trace) <= run_config.training.epochs + 1
    assert all(e.validation_loss is not None for e in result.trace)
    assert result.model.dims == (24, 16, 24)
    best = min(result.trace, key=lambda e: e.validation_loss)
    assert result.best_epoch == best.epoch


def test_train_pipeline_lowers_loss(small_dataset, run_config):
    params = dataclasses.replace(run_config.training, epochs=30, patience=30)
    result = train_pipeline(small_dataset, params, seed=2)
    assert result.trace[-1].train_loss < result.trace[0].train_loss


def test_train_pipeline_is_deterministic(small_dataset, run_config):
    first = train_pipeline(small_dataset, run_config.training, seed=2)
    second = train_pipeline(small_dataset, run_config.training, seed=2)
    assert first.model == second.model
    assert first.trace == second.trace


def test_train_without_validation(small_dataset, run_config):
    params = dataclasses.replace(run_config.training, validation_fraction=0.0)
    result = train_pipeline(small_dataset, params, seed=2)
    assert all(e.validation_loss is None for e in result.trace)


def test_early_stopping(small_dataset, run_config, mocker):
    # A loss that never improves stops training after `patience` epochs.
    mocker.patch("ofdm_timesync.dataset.network.loss", return_value=1.0)
    params = dataclasses.replace(run_config.training, epochs=50, patience=3)
    result = train_pipeline(small_dataset, params, seed=2)
    assert [e.epoch for e in result.trace] == [0, 1, 2, 3]
    assert result.best_epoch == 0
    assert result.trace[-1] == EpochLoss(epoch=3, train_loss=1.0, validation_loss=1.0)


def test_divergence(small_dataset, run_config):
    params = TrainingParams(samples=40, epochs=5, batch_size=8, learning_rate=1e200, patience=5)
    with pytest.raises(TrainingDiverged) as exc_info:
        train_pipeline(small_dataset, params, seed=2)
    assert exc_info.value.epoch == 1
    assert exc_info.value.last_finite_loss is not None


def test_batches_use_network_sgd(small_dataset, run_config, mocker):
    spy = mocker.spy(network, "sgd_step")
    params = dataclasses.replace(run_config.training, epochs=1, batch_size=8, validation_fraction=0.25)
    train_pipeline(small_dataset, params, seed=2)
    # 30 training samples in batches of 8.
    assert spy.call_count == 4
