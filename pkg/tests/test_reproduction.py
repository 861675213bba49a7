"""
End-to-end reproductions at the published sizes.

These train real networks and take minutes; run them with ``pytest -m slow``.
"""

import pytest

from ofdm_timesync.config import load_config
from ofdm_timesync.dataset import generate_dataset, save_dataset, load_dataset, train_pipeline
from ofdm_timesync.evaluation import ClassicMethod, LearnedMethod, find_scenario, run_curves
from ofdm_timesync.labels import LabelMode, LosPrior
from ofdm_timesync import network


pytestmark = pytest.mark.slow

SEED = 2024


@pytest.fixture(scope="module")
def run():
    return load_config("default")


@pytest.fixture(scope="module")
def datasets(run):
    prior = LosPrior(run.los_ratio)
    return {
        mode: generate_dataset(run.ofdm, prior, run.training.samples, SEED, label_mode=mode)
        for mode in LabelMode
    }


@pytest.fixture(scope="module")
def models(run, datasets):
    return {mode: train_pipeline(dataset, run.training, SEED).model for mode, dataset in datasets.items()}


@pytest.fixture(scope="module")
def methods(models):
    return [
        ClassicMethod(),
        LearnedMethod(models[LabelMode.TRIANGULAR], name="triangular"),
        LearnedMethod(models[LabelMode.RECTANGULAR], name="rectangular"),
    ]


def _by_method(curves):
    return {c.method: c for c in curves}


def test_effectiveness(run, methods):
    curves = _by_method(run_curves(methods, find_scenario("effectiveness", run, seed=SEED), run))
    classic, learned = curves["classic"], curves["triangular"]
    for snr in run.evaluation.snr_db:
        if snr >= 0:
            assert learned.point(snr).error_prob < classic.point(snr).error_prob
    for snr in (6, 8, 10):
        assert learned.point(snr).ci_hi < classic.point(snr).ci_lo


def test_triangular_beats_rectangular(run, methods):
    curves = _by_method(run_curves(methods, find_scenario("effectiveness", run, seed=SEED), run))
    assert curves["triangular"].point(10).error_prob <= curves["rectangular"].point(10).error_prob


@pytest.mark.parametrize("name", ["generalization-TDL-B", "generalization-TDL-C"])
def test_generalization(run, methods, name):
    curves = _by_method(run_curves(methods, find_scenario(name, run, seed=SEED), run))
    classic, learned = curves["classic"], curves["triangular"]
    for snr in (6, 8, 10):
        assert learned.point(snr).error_prob < classic.point(snr).error_prob
    assert learned.point(10).ci_hi < classic.point(10).ci_lo


def test_determinism(run, datasets, models, tmp_path):
    dataset = datasets[LabelMode.TRIANGULAR]
    again = generate_dataset(run.ofdm, LosPrior(run.los_ratio), run.training.samples, SEED)
    assert again == dataset
    save_dataset(dataset, tmp_path / "d.otsd")
    assert load_dataset(tmp_path / "d.otsd") == dataset
    model = train_pipeline(load_dataset(tmp_path / "d.otsd"), run.training, SEED).model
    assert model == models[LabelMode.TRIANGULAR]
    network.save_model(model, tmp_path / "m.otsm")
    assert network.load_model(tmp_path / "m.otsm", config=run.ofdm) == model
