"""
Monte-Carlo experiment orchestration: parameter sweeps over paired
realizations, per-iteration timing against N_S, and plot-ready outputs.
"""

import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from .factory import solve_variant
from .logger import logger
from .model import SensingSpec, StarRisProfile, TransmitCovariances
from .optimizer import ConvergenceTrace, InnerInit, PddState, SolverOptions, run_inner
from .scenario import ScenarioConfig, build_geometry, db_to_linear, dbm_to_watts, generate_channels
from .validation import ConfigError

SWEEP_AXES = ("n_ris_elements", "p_max_dbm", "sensing_sinr_db", "n_user_antennas", "n_targets", "n_tx", "none")

RESULT_COLUMNS = ["variant", "sweep_axis", "sweep_value", "seed", "assr_nats", "assr_bits",
                  "min_sensing_rate", "converged", "iterations", "wall_ms"]

TRACE_COLUMNS = ["iter", "augmented", "true", "min_residual", "branch_J", "branch_theta", "rho", "outer"]

SEED_STRIDE = 10 ** 6

FULL_SCALE = {"n_tx": 6, "n_rx": 4, "n_user_antennas": 2, "n_ris_elements": 100, "n_users": 4, "n_targets": 2}


def desk_scale_config() -> ScenarioConfig:
    return ScenarioConfig(n_tx=4, n_rx=4, n_user_antennas=2, n_ris_elements=16, n_users=2, n_targets=1)


def realization_seed(base_seed: int, index: int) -> int:
    return base_seed * SEED_STRIDE + index


@dataclass(frozen=True)
class ExperimentPlan:
    sweep_axis: str = "none"
    sweep_values: Tuple[Any, ...] = ()
    n_realizations: int = 5
    variants: Tuple[str, ...] = ("STAR", "cRIS", "NoRIS")
    base: ScenarioConfig = field(default_factory=desk_scale_config)
    output_path: Optional[str] = None
    base_seed: int = 1
    freeze_positions: bool = False
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "variants", tuple(self.variants))
        problems = []
        if self.sweep_axis not in SWEEP_AXES:
            problems.append(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if self.sweep_axis != "none" and not self.sweep_values:
            problems.append("sweep_values must be non-empty when sweep_axis is set")
        if self.n_realizations < 1:
            problems.append(f"n_realizations must be >= 1, got {self.n_realizations}")
        unknown = [v for v in self.variants if v not in ("STAR", "cRIS", "NoRIS")]
        if unknown:
            problems.append(f"Unknown variants: {unknown}")
        if problems:
            raise ConfigError("Invalid experiment plan: " + "; ".join(problems))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentPlan":
        data = dict(data)
        if "base" in data:
            data["base"] = ScenarioConfig.from_dict(data["base"])
        if "solver" in data:
            data["solver"] = SolverOptions.from_dict(data["solver"])
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"Unknown experiment plan keys: {unknown}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["base"] = self.base.to_dict()
        data["sweep_values"] = list(self.sweep_values)
        data["variants"] = list(self.variants)
        return data

    def at_full_scale(self) -> "ExperimentPlan":
        return replace(self, n_realizations=100, base=self.base.with_updates(**FULL_SCALE,
                                                                              reflection_user_indices=None))

    def sweep_points(self) -> List[Any]:
        return list(self.sweep_values) if self.sweep_axis != "none" else [None]

    def config_for(self, value: Any, variant: str) -> ScenarioConfig:
        """Scenario for one sweep point and variant."""
        changes: Dict[str, Any] = {"system_variant": variant}
        axis = self.sweep_axis
        if axis in ("n_ris_elements", "n_user_antennas", "n_tx"):
            changes[axis] = int(value)
        elif axis == "n_targets":
            changes.update(n_targets=int(value), target_azimuths_deg=None)
        elif axis == "p_max_dbm":
            changes["p_max"] = dbm_to_watts(float(value))
        elif axis == "sensing_sinr_db":
            changes["sensing_sinr_threshold"] = db_to_linear(float(value))
        return self.base.with_updates(**changes)


def load_plan(path: Union[str, Path]) -> ExperimentPlan:
    path = Path(path)
    try:
        return ExperimentPlan.from_dict(json.loads(path.read_text()))
    except OSError as e:
        raise ConfigError(f"Could not read plan {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Plan {path} is not valid JSON: {e}") from e


@dataclass(frozen=True)
class ResultRow:
    variant: str
    sweep_axis: str
    sweep_value: Optional[float]
    seed: int
    assr_nats: float
    assr_bits: float
    sensing_rates: Tuple[float, ...]
    converged: bool
    iterations: int
    wall_ms: float
    error: Optional[str] = None

    @property
    def min_sensing_rate(self) -> float:
        return min(self.sensing_rates) if self.sensing_rates else math.nan

    def to_record(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "sweep_axis": self.sweep_axis,
            "sweep_value": self.sweep_value,
            "seed": self.seed,
            "assr_nats": self.assr_nats,
            "assr_bits": self.assr_bits,
            "min_sensing_rate": self.min_sensing_rate,
            "converged": self.converged,
            "iterations": self.iterations,
            "wall_ms": self.wall_ms,
        }


@dataclass(frozen=True)
class _Task:
    order: Tuple[int, int, int]
    variant: str
    sweep_axis: str
    sweep_value: Any
    config: ScenarioConfig
    seed: int
    geometry_seed: int
    solver: SolverOptions


def _solve_task(task: _Task) -> Tuple[Tuple[int, int, int], ResultRow]:
    started = time.perf_counter()
    value = None if task.sweep_value is None else float(task.sweep_value)
    try:
        geometry = build_geometry(task.config, task.geometry_seed)
        channels = generate_channels(task.config, geometry, task.seed)
        result = solve_variant(channels, task.config, task.solver, task.variant, seed=task.seed)
        nats = result.metrics.sum_secrecy_nats
        row = ResultRow(task.variant, task.sweep_axis, value, task.seed, nats, nats / math.log(2.0),
                        result.metrics.sensing_rates, result.converged, result.inner_iterations,
                        1e3 * (time.perf_counter() - started))
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as e:
        logger.error(f"Run failed: {type(e).__name__}: {e}", extra={"variant": task.variant, "seed": task.seed})
        row = ResultRow(task.variant, task.sweep_axis, value, task.seed, math.nan, math.nan, (), False, 0,
                        1e3 * (time.perf_counter() - started), error=f"{type(e).__name__}: {e}")
    return task.order, row


def run_experiment(plan: ExperimentPlan, workers: int = 1, progress: bool = True) -> List[ResultRow]:
    """
    Solve every (variant, sweep value, realization) of a plan.

    Realization ``i`` uses seed ``base_seed * 10**6 + i`` for every variant and
    sweep value, so variants are compared on identical draws. Failed runs are
    recorded with an ``error`` and never abort the sweep.

    Returns:
        list: Rows sorted by (variant, sweep value, seed)
    """
    tasks = []
    for v_index, variant in enumerate(plan.variants):
        for s_index, value in enumerate(plan.sweep_points()):
            config = plan.config_for(value, variant)
            for index in range(plan.n_realizations):
                seed = realization_seed(plan.base_seed, index)
                geometry_seed = realization_seed(plan.base_seed, 0) if plan.freeze_positions else seed
                tasks.append(_Task((v_index, s_index, seed), variant, plan.sweep_axis, value, config,
                                   seed, geometry_seed, plan.solver))

    logger.info(f"Running {len(tasks)} solve(s): axis={plan.sweep_axis}, variants={list(plan.variants)}, "
                f"realizations={plan.n_realizations}")
    if not tasks:
        return []

    if workers > 1:
        with Pool(processes=workers) as pool:
            results = list(tqdm(pool.imap_unordered(_solve_task, tasks), total=len(tasks),
                                desc="Sweep", disable=not progress))
    else:
        results = [_solve_task(task) for task in tqdm(tasks, desc="Sweep", disable=not progress)]

    failures = sum(1 for _, row in results if row.error)
    if failures:
        logger.warning(f"{failures} of {len(results)} run(s) failed")
    return [row for _, row in sorted(results, key=lambda item: item[0])]


@dataclass(frozen=True)
class TimingTable:
    """
    Median per-iteration wall times against N_S.

    ``slope`` is the log-log slope of the N_S-dependent cost, the median time
    minus ``baseline_seconds`` measured on a one-element surface;
    ``raw_slope`` fits the median times themselves.
    """

    n_ris: Tuple[int, ...]
    median_seconds: Tuple[float, ...]
    slope: Optional[float]
    baseline_seconds: Optional[float] = None
    raw_slope: Optional[float] = None

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"n_ris_elements": self.n_ris, "median_iteration_s": self.median_seconds})
        if self.baseline_seconds is not None:
            frame["marginal_iteration_s"] = frame["median_iteration_s"] - self.baseline_seconds
        return frame


def timing_base_config() -> ScenarioConfig:
    """Dimensions where the per-element work is visible above the fixed per-iteration cost."""
    return ScenarioConfig(n_tx=16, n_rx=4, n_user_antennas=8, n_ris_elements=128, n_users=4, n_targets=1)


def _median_iteration_time(config: ScenarioConfig, opts: SolverOptions, seed: int) -> float:
    channels = generate_channels(config, seed=seed)
    trace = run_inner(
        channels,
        InnerInit(TransmitCovariances.zeros(channels.n_users, channels.n_targets, channels.n_tx),
                  StarRisProfile.uniform(channels.n_ris)),
        PddState.initial(channels.n_targets, opts),
        opts,
        spec=SensingSpec.from_config(config),
        p_max=config.p_max,
    ).trace
    return float(np.median([record.wall_time for record in trace.records]))


def _log_log_slope(ns_values: Sequence[int], seconds: Sequence[float]) -> float:
    return float(np.polyfit(np.log(ns_values), np.log(seconds), 1)[0])


def timing_probe(base: ScenarioConfig, ns_values: Sequence[int], opts: Optional[SolverOptions] = None,
                 iterations: int = 10, seed: int = 0, baseline_ns: int = 1) -> TimingTable:
    """
    Median wall time of one inner iteration for each N_S, with log-log slopes.

    Every line search runs exactly one trial so each iteration does the same
    amount of work. The fixed per-iteration cost is measured once at
    ``baseline_ns`` elements and removed before fitting ``slope``. Slopes are
    None when fewer than two distinct N_S values are given; ``slope`` is also
    None when some time does not exceed the baseline.
    """
    opts = replace(opts or SolverOptions(), inner_max_iter=iterations, tolerance=0.0, armijo_max_backtracks=0)
    ns_values = [int(n) for n in ns_values]
    if len(ns_values) > 1 and max(ns_values) < 10 * min(ns_values):
        logger.warning(f"N_S series {ns_values} spans less than a decade; the fitted slope is coarse")

    def median_time(n_ris: int) -> float:
        config = base.with_updates(n_ris_elements=n_ris, system_variant="STAR")
        return _median_iteration_time(config, opts, seed)

    medians = []
    for n_ris in tqdm(ns_values, desc="Timing"):
        medians.append(median_time(n_ris))
        logger.info(f"N_S={n_ris}: median iteration {medians[-1] * 1e3:.3f} ms")

    if len(set(ns_values)) < 2:
        return TimingTable(tuple(ns_values), tuple(medians), None)

    baseline = median_time(baseline_ns)
    marginal = [t - baseline for t in medians]
    slope = None
    if min(marginal) > 0:
        slope = _log_log_slope(ns_values, marginal)
    else:
        logger.warning(f"Iteration times do not exceed the N_S={baseline_ns} baseline "
                       f"({baseline * 1e3:.3f} ms); no marginal slope")
    return TimingTable(tuple(ns_values), tuple(medians), slope, baseline, _log_log_slope(ns_values, medians))


def _summarize(frame: pd.DataFrame) -> Dict[str, Any]:
    def clean(value):
        return None if value is None or not math.isfinite(value) else float(value)

    # Sweep value is missing only for axis "none", where every row shares it
    frame = frame.assign(point=pd.to_numeric(frame["sweep_value"]).astype(float).fillna(0.0),
                         assr_nats=pd.to_numeric(frame["assr_nats"]).astype(float))
    no_axis = bool(frame["sweep_value"].isna().all())

    def point_label(point):
        return None if no_axis else float(point)

    groups = []
    for (variant, point), group in frame.groupby(["variant", "point"], sort=True):
        values = group["assr_nats"].dropna()
        count = int(values.size)
        groups.append({
            "variant": variant,
            "sweep_value": point_label(point),
            "count": count,
            "mean_assr_nats": clean(values.mean()) if count else None,
            "sem_assr_nats": clean(values.std(ddof=1) / math.sqrt(count)) if count > 1 else None,
            "mean_assr_bits": clean(values.mean() / math.log(2.0)) if count else None,
            "converged_fraction": float(group["converged"].astype(bool).mean()),
        })

    comparisons = []
    for point, block in frame.groupby("point", sort=True):
        table = block.pivot_table(index="seed", columns="variant", values="assr_nats", aggfunc="mean")
        if "STAR" not in table.columns:
            continue
        entry = {"sweep_value": point_label(point)}
        star_mean = table["STAR"].mean()
        for other in ("cRIS", "NoRIS"):
            if other in table.columns:
                other_mean = table[other].mean()
                gain = 100.0 * (star_mean - other_mean) / abs(other_mean) if other_mean else None
                entry[f"star_gain_vs_{other.lower()}_pct"] = clean(gain)
        if "cRIS" in table.columns:
            paired = table[["STAR", "cRIS"]].dropna()
            entry["paired_dominance"] = float((paired["STAR"] >= paired["cRIS"]).mean()) if len(paired) else None
        comparisons.append(entry)

    return {"groups": groups, "comparisons": comparisons}


def emit_results(rows: Sequence[ResultRow], out_dir: Union[str, Path],
                 trace: Optional[ConvergenceTrace] = None) -> Dict[str, Path]:
    """
    Write ``results.csv``, ``summary.json`` and optionally ``trace.csv`` under ``out_dir``.

    Returns:
        dict: Written file paths keyed by kind
    """
    out_dir = Path(out_dir)
    paths = {"results": out_dir / "results.csv", "summary": out_dir / "summary.json"}
    frame = pd.DataFrame([row.to_record() for row in rows], columns=RESULT_COLUMNS)
    errors = [{"variant": r.variant, "sweep_value": r.sweep_value, "seed": r.seed, "error": r.error}
              for r in rows if r.error]
    summary = _summarize(frame)
    summary["errors"] = errors

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        frame.to_csv(paths["results"], index=False)
        paths["summary"].write_text(json.dumps(summary, indent=2))
        if trace is not None:
            paths["trace"] = out_dir / "trace.csv"
            write_trace(trace, paths["trace"])
    except OSError as e:
        raise OSError(f"Could not write results under {out_dir}: {e}") from e

    logger.info(f"Wrote {len(rows)} row(s) to {paths['results']}")
    return paths


def write_trace(trace: ConvergenceTrace, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        pd.DataFrame(trace.to_rows(), columns=TRACE_COLUMNS).to_csv(path, index=False)
    except OSError as e:
        raise OSError(f"Could not write trace {path}: {e}") from e
    return path
