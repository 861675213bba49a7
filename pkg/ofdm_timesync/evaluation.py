"""
Monte-Carlo evaluation of timing estimators.

A scenario fixes the channel, the SNR points and the number of trials; each
trial sends one frame through the channel and asks every method for an
estimate.  An estimate is correct when it lands in the ISI-free region.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from ofdm_timesync import network
from ofdm_timesync.channel import (
    DelayProfile, assemble_frame, draw_realization, exp_decay_profile, load_tdl_profile, observe,
)
from ofdm_timesync.correlator import DegenerateMetric, TimingMetric, classic_estimate, normalize, timing_metric
from ofdm_timesync.debug import is_debug, print_long_array
from ofdm_timesync.signals import DimensionError, local_sequence, training_symbol
from ofdm_timesync.types import RunConfig
from ofdm_timesync.utils import derive_rng, snr_key

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["scenario", "method", "snr_db", "trials", "errors", "error_prob", "ci_lo", "ci_hi"]
CSV_FLOAT_FORMAT = "%.16e"

ROBUSTNESS_N = (96, 128, 160)
GENERALIZATION_PROFILES = ("TDL-B", "TDL-C")


class InvalidScenario(ValueError):
    """Raised when a scenario can't be run."""

class ModelMismatch(ValueError):
    """Raised when a model's layer sizes don't match the frame being evaluated."""

class ResultsError(RuntimeError):
    """Raised when results can't be written or read back."""


@dataclasses.dataclass(frozen=True)
class ExpDecay:
    """An exponentially decayed channel with L taps at delays 0..L−1."""
    L: int
    eta: float

    def profile(self, config: RunConfig) -> DelayProfile:
        return exp_decay_profile(self.L, self.eta)

    def describe(self) -> str:
        return f"exp-decay L={self.L} eta={self.eta:.6g}"


@dataclasses.dataclass(frozen=True)
class Tdl:
    """A tapped-delay-line profile, by shipped name or file path."""
    profile_file: str

    def profile(self, config: RunConfig) -> DelayProfile:
        return load_tdl_profile(self.profile_file, config=config.ofdm)

    def describe(self) -> str:
        return self.profile_file


ChannelSpec = Union[ExpDecay, Tdl]


@dataclasses.dataclass(frozen=True)
class Scenario:
    """
    One evaluation setting.

    `theta` of None draws the timing offset uniformly per trial.  `N`
    overrides the subcarrier count of the run config, for robustness runs.
    """
    name: str
    channel: ChannelSpec
    snr_db: Tuple[float, ...]
    trials: int
    seed: int = 0
    theta: Optional[int] = None
    cfo: float = 0.0
    N: Optional[int] = None

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidScenario(f"Scenario {self.name!r} needs at least one trial, got {self.trials}")
        if not self.snr_db:
            raise InvalidScenario(f"Scenario {self.name!r} has no SNR points")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))

    def run_config(self, config: RunConfig) -> RunConfig:
        """The run config this scenario's frames are made with."""
        if self.N is None or self.N == config.ofdm.N:
            return config
        return config.with_n(self.N)

    def tau_L(self, config: RunConfig) -> int:
        """The true delay of the last path, which bounds the ISI-free region."""
        return self.channel.profile(self.run_config(config)).max_delay


@dataclasses.dataclass(frozen=True)
class CurvePoint:
    snr_db: float
    trials: int
    errors: int
    error_prob: float
    ci_lo: float
    ci_hi: float

    def __post_init__(self):
        if not 0 <= self.errors <= self.trials:
            raise ValueError(f"{self.errors} errors out of {self.trials} trials")
        if not self.ci_lo <= self.error_prob <= self.ci_hi:
            raise ValueError(f"Interval [{self.ci_lo}, {self.ci_hi}] doesn't contain {self.error_prob}")

    @classmethod
    def from_counts(cls, snr_db: float, trials: int, errors: int) -> CurvePoint:
        lo, hi = clopper_pearson(errors, trials)
        return cls(snr_db=float(snr_db), trials=trials, errors=errors, error_prob=errors / trials, ci_lo=lo, ci_hi=hi)

    @property
    def ci(self) -> Tuple[float, float]:
        return self.ci_lo, self.ci_hi


@dataclasses.dataclass(frozen=True)
class ErrorCurve:
    """Error probability against SNR for one method in one scenario."""
    scenario: str
    method: str
    points: Tuple[CurvePoint, ...]

    def point(self, snr_db: float) -> CurvePoint:
        for p in self.points:
            if p.snr_db == float(snr_db):
                return p
        raise KeyError(snr_db)


def is_correct(theta_hat: Optional[int], theta: int, tau_L: int, Ng: int) -> bool:
    """Is the estimate inside [theta+tau_L, theta+Ng]?"""
    if theta_hat is None:
        return False
    return tau_L <= theta_hat - theta <= Ng


def clopper_pearson(errors: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """The exact binomial confidence interval for errors/trials."""
    if trials < 1:
        raise ValueError("Need at least one trial for a confidence interval")
    alpha = 1.0 - confidence
    lo = 0.0 if errors == 0 else float(stats.beta.ppf(alpha / 2, errors, trials - errors + 1))
    hi = 1.0 if errors == trials else float(stats.beta.ppf(1 - alpha / 2, errors + 1, trials - errors))
    p = errors / trials
    # ppf can land a hair on the wrong side of p at the extremes.
    return min(lo, p), max(hi, p)


class ClassicMethod:
    """The correlator peak."""

    def __init__(self, name: str = "classic"):
        self.name = name

    def check(self, config: RunConfig) -> None:
        pass

    def estimate(self, metric: TimingMetric) -> Optional[int]:
        return classic_estimate(metric)


class LearnedMethod:
    """The network applied to the normalized timing metric."""

    def __init__(self, model: network.Mlp, name: str = "learned"):
        self.model = model
        self.name = name

    def check(self, config: RunConfig) -> None:
        try:
            self.model.check_config(config.ofdm)
        except DimensionError as exc:
            raise ModelMismatch(f"Method {self.name!r}: {exc}") from exc

    def estimate(self, metric: TimingMetric) -> Optional[int]:
        try:
            q = normalize(metric)
        except DegenerateMetric:
            return None
        return network.estimate(network.forward(self.model, q).o)


Method = Union[ClassicMethod, LearnedMethod]


def run_curves(methods: Sequence[Method], scenario: Scenario, config: RunConfig) -> List[ErrorCurve]:
    """
    Evaluate several methods on the same frames.

    Trial k at SNR s draws everything from derive_rng(seed, scenario, s, k),
    so a point doesn't depend on the other points or on the method list.
    """
    if not methods:
        raise InvalidScenario("No methods to evaluate")
    names = [m.name for m in methods]
    if len(set(names)) != len(names):
        raise InvalidScenario(f"Method names must be unique: {names}")
    run = scenario.run_config(config)
    ofdm = run.ofdm
    for method in methods:
        method.check(run)
    profile = scenario.channel.profile(run)
    tau_L = profile.max_delay
    symbol = training_symbol(ofdm)
    x = local_sequence(ofdm)
    logger.info(
        f"Evaluating {', '.join(names)} on {scenario.name!r} ({scenario.channel.describe()}, "
        f"N={ofdm.N}, {scenario.trials} trials per point)"
    )

    points: List[List[CurvePoint]] = [[] for _ in methods]
    for snr in scenario.snr_db:
        errors = [0] * len(methods)
        for k in range(scenario.trials):
            rng = derive_rng(scenario.seed, scenario.name, snr_key(snr), k)
            theta = scenario.theta
            if theta is None:
                theta = int(rng.integers(0, ofdm.max_theta, endpoint=True))
            realization = draw_realization(profile, theta, scenario.cfo, snr, rng, config=ofdm)
            stream = assemble_frame(ofdm, symbol, theta, rng)
            frame = observe(stream, realization, ofdm, rng)
            metric = timing_metric(frame.y, x)
            for i, method in enumerate(methods):
                theta_hat = method.estimate(metric)
                if not is_correct(theta_hat, theta, tau_L, ofdm.Ng):
                    errors[i] += 1
                    if is_debug(__name__):
                        logger.debug(f"{method.name} missed: theta={theta}, estimate={theta_hat}, snr={snr}")
                        print_long_array(f"metric for trial {k}", metric.f)
        for i, method in enumerate(methods):
            point = CurvePoint.from_counts(snr, scenario.trials, errors[i])
            points[i].append(point)
            logger.info(
                f"{scenario.name} {method.name} at {snr:g} dB: {errors[i]}/{scenario.trials} errors "
                f"(p={point.error_prob:.4g}, 95% CI [{point.ci_lo:.4g}, {point.ci_hi:.4g}])"
            )
    return [
        ErrorCurve(scenario=scenario.name, method=method.name, points=tuple(pts))
        for method, pts in zip(methods, points)
    ]


def run_curve(method: Method, scenario: Scenario, config: RunConfig) -> ErrorCurve:
    """Evaluate one method, see `run_curves`."""
    return run_curves([method], scenario, config)[0]


def effectiveness_channel(config: RunConfig) -> ExpDecay:
    """
    The exp-decay test channel: L = los_ratio taps, and a decay that puts
    the last tap 10 dB below the first.
    """
    L = config.los_ratio
    return ExpDecay(L=L, eta=math.log(10) / max(L - 1, 1))


def preset_scenarios(config: RunConfig, seed: int = 0) -> List[Scenario]:
    """
    The standard scenarios: effectiveness, robustness over N, and
    generalization to TDL channels the model never trained on.
    """
    ev = config.evaluation
    common = dict(snr_db=ev.snr_db, trials=ev.trials, seed=seed, cfo=ev.cfo)
    channel = effectiveness_channel(config)
    scenarios = [Scenario(name="effectiveness", channel=channel, **common)]
    scenarios += [
        Scenario(name=f"robustness-N{n}", channel=channel, N=n, **common)
        for n in ROBUSTNESS_N
    ]
    scenarios += [
        Scenario(name=f"generalization-{profile}", channel=Tdl(profile), **common)
        for profile in GENERALIZATION_PROFILES
    ]
    return scenarios


def find_scenario(name: str, config: RunConfig, seed: int = 0) -> Scenario:
    for scenario in preset_scenarios(config, seed=seed):
        if scenario.name == name:
            return scenario
    names = ", ".join(s.name for s in preset_scenarios(config))
    raise InvalidScenario(f"No scenario named {name!r}, expected one of {names}")


def curves_frame(curves: Iterable[ErrorCurve]) -> pd.DataFrame:
    rows = [
        {
            "scenario": curve.scenario,
            "method": curve.method,
            "snr_db": p.snr_db,
            "trials": p.trials,
            "errors": p.errors,
            "error_prob": p.error_prob,
            "ci_lo": p.ci_lo,
            "ci_hi": p.ci_hi,
        }
        for curve in curves
        for p in curve.points
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def plot_curves(curves: Sequence[ErrorCurve], path: Union[str, Path]) -> None:
    """A static SVG of error probability against SNR, log-scaled."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    for curve in curves:
        snr = [p.snr_db for p in curve.points]
        # Zero errors can't go on a log axis; plot the upper CI bound instead.
        probs = [p.error_prob if p.errors else p.ci_hi for p in curve.points]
        ax.semilogy(snr, probs, marker="o", label=f"{curve.scenario}: {curve.method}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Error probability of TS")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def emit_results(curves: Sequence[ErrorCurve], path: Union[str, Path], plot: bool = True) -> List[Path]:
    """
    Write the curves to a CSV file at `path`, and an SVG plot next to it.

    Returns the paths written.
    """
    if not curves:
        raise ResultsError("No curves to write")
    path = Path(path)
    written = [path]
    try:
        curves_frame(curves).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        if plot:
            svg = path.with_suffix(".svg")
            plot_curves(curves, svg)
            written.append(svg)
    except OSError as exc:
        raise ResultsError(f"Can't write results to {str(path)!r}: {exc}") from exc
    for p in written:
        logger.info(f"Wrote {p}")
    return written


def read_results(path: Union[str, Path]) -> List[ErrorCurve]:
    """Parse a CSV written by `emit_results` back into curves."""
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as exc:
        raise ResultsError(f"Can't read results from {str(path)!r}: {exc}") from exc
    if list(df.columns) != CSV_COLUMNS:
        raise ResultsError(f"Unexpected columns in {str(path)!r}: {list(df.columns)}")
    curves = []
    for (scenario, method), group in df.groupby(["scenario", "method"], sort=False):
        points = tuple(
            CurvePoint(
                snr_db=float(row.snr_db),
                trials=int(row.trials),
                errors=int(row.errors),
                error_prob=float(row.error_prob),
                ci_lo=float(row.ci_lo),
                ci_hi=float(row.ci_hi),
            )
            for row in group.itertuples(index=False)
        )
        curves.append(ErrorCurve(scenario=str(scenario), method=str(method), points=points))
    return curves
