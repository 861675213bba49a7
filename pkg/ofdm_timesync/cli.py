"""
The ofdm-timesync command line.
"""

from __future__ import annotations

import dataclasses
import functools
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
import pandas as pd

from ofdm_timesync import __version__, settings
from ofdm_timesync.channel import InvalidOffset, ProfileError
from ofdm_timesync.complexity import METHODS, UnknownMethod, complexity_sweep, example_table
from ofdm_timesync.config import load_config
from ofdm_timesync.correlator import DegenerateMetric
from ofdm_timesync.dataset import (
    DatasetFormatError, SampleGenerationFailed, TrainingDiverged, TrainingResult,
    generate_dataset, load_dataset, save_dataset, train_pipeline,
)
from ofdm_timesync.evaluation import (
    ClassicMethod, ErrorCurve, InvalidScenario, LearnedMethod, Method, ModelMismatch, ResultsError,
    ROBUSTNESS_N, emit_results, find_scenario, preset_scenarios, run_curves,
)
from ofdm_timesync.labels import InvalidLabelSpec, LabelMode, LosPrior, PriorViolation
from ofdm_timesync.network import EmptyBatch, Mlp, ModelFormatError, PreconditionError, load_model, save_model
from ofdm_timesync.signals import DimensionError, InvalidCyclicPrefix, InvalidRoot
from ofdm_timesync.types import InvalidConfig, RunConfig

logger = logging.getLogger(__name__)

# Errors that mean bad input or a failed run, shown as a one-line message.
DOMAIN_ERRORS = (
    InvalidConfig, InvalidRoot, InvalidCyclicPrefix, DimensionError, ProfileError, InvalidOffset,
    DegenerateMetric, InvalidLabelSpec, PriorViolation, ModelFormatError, EmptyBatch,
    PreconditionError, DatasetFormatError, SampleGenerationFailed, TrainingDiverged,
    InvalidScenario, ModelMismatch, UnknownMethod, ResultsError,
)

RECTANGULAR_NOTE = (
    "The rectangular label only approximates the flat label of earlier "
    "label-designed synchronizers."
)


def domain_errors(func):
    """Turn domain exceptions into click errors."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except DOMAIN_ERRORS as exc:
            raise click.ClickException(str(exc)) from exc
    return wrapper


def common_options(func):
    """--config, --seed and --out, shared by every command."""
    func = click.option(
        "--out", default=lambda: settings.OUTPUT_DIR, show_default=True,
        help="Output file, or a directory to write the default file name into.",
    )(func)
    func = click.option(
        "--seed", type=click.IntRange(min=0), default=lambda: settings.DEFAULT_SEED, show_default=True,
        help="Master seed.",
    )(func)
    func = click.option(
        "--config", "config_name", default=lambda: settings.CONFIG, show_default=True,
        help="Configuration name (default, development, testing) or YAML file.",
    )(func)
    return func


def _run_config(config_name: str, n: Optional[int] = None) -> RunConfig:
    run = load_config(config_name)
    if n is not None and n != run.ofdm.N:
        run = run.with_n(n)
    return run


def _out_file(out: str, default_name: str) -> Path:
    path = Path(out)
    if path.is_dir() or out.endswith(("/", "\\")):
        path.mkdir(parents=True, exist_ok=True)
        return path / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _trace_path(model_path: Path) -> Path:
    return model_path.with_name(model_path.stem + "-loss.csv")


def _write_trace(result: TrainingResult, path: Path) -> None:
    df = pd.DataFrame([dataclasses.asdict(e) for e in result.trace])
    df.to_csv(path, index=False, float_format="%.16e")
    logger.info(f"Wrote {path}")


def _echo_curves(curves: List[ErrorCurve]) -> None:
    for curve in curves:
        click.echo(f"{curve.scenario} / {curve.method}")
        for p in curve.points:
            click.echo(
                f"  {p.snr_db:6.1f} dB  {p.errors:6d}/{p.trials:<6d}  "
                f"p={p.error_prob:.4g}  [{p.ci_lo:.4g}, {p.ci_hi:.4g}]"
            )


@click.group()
@click.version_option(__version__)
def main():
    """Learned OFDM timing synchronization: data, training, evaluation."""


@main.command("gen-data")
@common_options
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Number of samples (default from config).")
@click.option(
    "--label-mode", type=click.Choice([m.value for m in LabelMode]), default=None,
    help="Label shape (default from config).",
)
@click.option("--n", "n", type=click.IntRange(min=2), default=None, help="Subcarrier count override.")
@domain_errors
def gen_data(config_name, seed, out, samples, label_mode, n):
    """Generate a training dataset."""
    run = _run_config(config_name, n)
    mode = LabelMode(label_mode or run.training.label_mode)
    if mode.is_approximation:
        click.echo(RECTANGULAR_NOTE, err=True)
    dataset = generate_dataset(
        run.ofdm,
        LosPrior(run.los_ratio),
        samples or run.training.samples,
        seed,
        cfo=run.training.cfo,
        label_mode=mode,
        max_redraws=run.training.max_redraws,
    )
    path = _out_file(out, f"dataset-N{run.ofdm.N}-{mode.value}.otsd")
    save_dataset(dataset, path)
    click.echo(f"Wrote {len(dataset)} samples to {path}")


@main.command()
@common_options
@click.option("--dataset", "dataset_path", required=True, type=click.Path(dir_okay=False), help="Dataset file.")
@click.option("--n", "n", type=click.IntRange(min=2), default=None, help="Subcarrier count override.")
@domain_errors
def train(config_name, seed, out, dataset_path, n):
    """Train a network on a dataset, writing the model and its loss trace."""
    run = _run_config(config_name, n)
    dataset = load_dataset(dataset_path, config=run.ofdm)
    result = train_pipeline(dataset, run.training, seed)
    path = _out_file(out, Path(dataset_path).with_suffix(".otsm").name)
    save_model(result.model, path)
    _write_trace(result, _trace_path(path))
    last = result.trace[-1]
    click.echo(
        f"Wrote {path}: best epoch {result.best_epoch} of {last.epoch}, "
        f"train loss {last.train_loss:.6g}, validation loss {last.validation_loss}"
    )


def _parse_model_option(value: str) -> Tuple[str, str]:
    name, sep, path = value.partition("=")
    if not sep:
        return Path(value).stem, value
    return name, path


@main.command("eval")
@common_options
@click.option(
    "--model", "models", multiple=True,
    help="A trained model as NAME=PATH, or just PATH to name it after the file.  Repeatable.",
)
@click.option(
    "--scenario", "scenario_names", multiple=True, default=("effectiveness",), show_default=True,
    help="Preset scenario name.  Repeatable.",
)
@click.option("--classic/--no-classic", default=True, show_default=True, help="Include the correlator baseline.")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Trials per SNR point (default from config).")
@click.option("--plot/--no-plot", default=True, show_default=True, help="Also write an SVG plot.")
@domain_errors
def evaluate(config_name, seed, out, models, scenario_names, classic, trials, plot):
    """Evaluate the baseline and trained models on preset scenarios."""
    run = load_config(config_name)
    if trials is not None:
        run = dataclasses.replace(run, evaluation=dataclasses.replace(run.evaluation, trials=trials))
    methods: List[Method] = [ClassicMethod()] if classic else []
    for value in models:
        name, path = _parse_model_option(value)
        methods.append(LearnedMethod(load_model(path), name=name))
    if not methods:
        raise click.UsageError("Nothing to evaluate: give --model or --classic")

    curves: List[ErrorCurve] = []
    for name in scenario_names:
        curves += run_curves(methods, find_scenario(name, run, seed=seed), run)
    _echo_curves(curves)
    for path in emit_results(curves, _out_file(out, "results.csv"), plot=plot):
        click.echo(f"Wrote {path}")


@main.command()
@common_options
@click.option("--sweep", "do_sweep", is_flag=True, help="Also write CM counts against Ns.")
@domain_errors
def complexity(config_name, seed, out, do_sweep):
    """Complex multiplications per estimate, for each method."""
    click.echo(f"{'method':10} {'CM':>12} {'published':>12}")
    for row in example_table():
        click.echo(f"{row.method:10} {row.cm:12.0f} {row.published:12d}")
    if do_sweep:
        run = load_config(config_name)
        rows = complexity_sweep(METHODS, N=run.ofdm.N, Ng=run.ofdm.Ng, L=run.los_ratio)
        path = _out_file(out, "complexity.csv")
        pd.DataFrame([dataclasses.asdict(r) for r in rows]).drop(columns=["published"]).to_csv(path, index=False)
        click.echo(f"Wrote {path}")


@main.command()
@common_options
@click.option("--plot/--no-plot", default=True, show_default=True, help="Also write an SVG plot.")
@domain_errors
def sweep(config_name, seed, out, plot):
    """
    The whole reproduction: datasets, triangular and rectangular models for
    every N the presets need, then every preset scenario.
    """
    run = load_config(config_name)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    click.echo(RECTANGULAR_NOTE, err=True)

    models: Dict[Tuple[int, LabelMode], Mlp] = {}
    for n in sorted({run.ofdm.N, *ROBUSTNESS_N}):
        run_n = _run_config(config_name, n)
        for mode in LabelMode:
            stem = out_dir / f"N{n}-{mode.value}"
            dataset = generate_dataset(
                run_n.ofdm, LosPrior(run_n.los_ratio), run_n.training.samples, seed,
                cfo=run_n.training.cfo, label_mode=mode, max_redraws=run_n.training.max_redraws,
            )
            save_dataset(dataset, stem.with_suffix(".otsd"))
            result = train_pipeline(dataset, run_n.training, seed)
            save_model(result.model, stem.with_suffix(".otsm"))
            _write_trace(result, _trace_path(stem.with_suffix(".otsm")))
            models[(n, mode)] = result.model

    curves: List[ErrorCurve] = []
    for scenario in preset_scenarios(run, seed=seed):
        n = scenario.N or run.ofdm.N
        methods: List[Method] = [
            ClassicMethod(),
            LearnedMethod(models[(n, LabelMode.TRIANGULAR)], name="triangular"),
            LearnedMethod(models[(n, LabelMode.RECTANGULAR)], name="rectangular"),
        ]
        try:
            curves += run_curves(methods, scenario, run)
        except ProfileError as exc:
            logger.warning(f"Skipping scenario {scenario.name!r}: {exc}")
    _echo_curves(curves)
    for path in emit_results(curves, out_dir / "results.csv", plot=plot):
        click.echo(f"Wrote {path}")
