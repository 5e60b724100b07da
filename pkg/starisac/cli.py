"""
Command-line entry point.

Subcommands: ``solve`` (one realization), ``sweep`` (Monte-Carlo plan),
``bench`` (per-iteration timing against N_S), ``check`` (numerical test
suites) and ``variants``. Exit codes: 0 success, 2 configuration error,
3 iteration cap reached in ``solve``.
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .experiments import emit_results, load_plan, run_experiment, timing_base_config, timing_probe, write_trace
from .factory import solve_variant
from .logger import logger
from .optimizer import SolverOptions
from .registry import list_variants, variant_registry
from .scenario import generate_channels, load_scenario_config
from .validation import ConfigError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

# Suites run by ``check``
CHECK_SUITES = ("test_gradients.py", "test_projections.py", "test_optimizer.py")


def _load_solver_options(path: Optional[str]) -> SolverOptions:
    if path is None:
        return SolverOptions()
    document = json.loads(Path(path).read_text())
    section = document.get("solver", {}) if isinstance(document, dict) else {}
    if not isinstance(section, dict):
        raise ConfigError("The \"solver\" section must be an object")
    return SolverOptions.from_dict(section)


def _cmd_solve(args) -> int:
    config = load_scenario_config(args.config)
    options = _load_solver_options(args.config)
    variant = variant_registry.resolve(args.variant) if args.variant else config.system_variant
    config = config.with_updates(system_variant=variant)
    seed = config.rng_seed if args.seed is None else args.seed

    channels = generate_channels(config, seed=seed)
    result = solve_variant(channels, config, options, variant, seed=seed)

    if args.trace:
        write_trace(result.trace, args.trace)
    summary = {
        "variant": variant,
        "seed": seed,
        "converged": result.converged,
        "outer_iterations": result.outer_iterations,
        "inner_iterations": result.inner_iterations,
        "augmented": result.augmented,
        "true_objective": result.true_objective,
        "relative_gap": result.relative_gap,
        **result.metrics.to_dict(),
    }
    text = json.dumps(summary, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _cmd_sweep(args) -> int:
    plan = load_plan(args.plan)
    if args.full_scale:
        plan = plan.at_full_scale()
    if args.freeze_positions:
        plan = replace(plan, freeze_positions=True)
    rows = run_experiment(plan, workers=args.workers, progress=not args.quiet)
    out_dir = args.out or plan.output_path
    if out_dir is None:
        raise ConfigError("No output directory: pass --out or set output_path in the plan")
    emit_results(rows, out_dir)
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        ns_values = [int(n) for n in args.ns.split(",") if n.strip()]
    except ValueError as e:
        raise ConfigError(f"--ns must be a comma-separated list of integers: {e}") from e
    if not ns_values:
        raise ConfigError("--ns needs at least one value")
    base = load_scenario_config(args.config) if args.config else timing_base_config()
    table = timing_probe(base, ns_values, iterations=args.iterations, seed=args.seed)
    report = {
        "rows": [{"n_ris_elements": n, "median_iteration_s": t}
                 for n, t in zip(table.n_ris, table.median_seconds)],
        "slope": table.slope,
        "baseline_iteration_s": table.baseline_seconds,
        "raw_slope": table.raw_slope,
    }
    Path(args.out).write_text(json.dumps(report, indent=2))
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_check(args) -> int:
    try:
        import pytest
    except ImportError:
        logger.error("The check command needs pytest (install the dev extras)")
        return EXIT_FAILURE
    tests_dir = Path(__file__).resolve().parent.parent / "tests"
    suites = [str(tests_dir / name) for name in CHECK_SUITES if (tests_dir / name).exists()]
    if not suites:
        logger.error(f"No test suites found under {tests_dir}")
        return EXIT_FAILURE
    markers = [] if args.include_slow else ["-m", "not slow"]
    return EXIT_OK if pytest.main(["-q", *markers, *suites]) == 0 else EXIT_FAILURE


def _cmd_variants(args) -> int:
    for name, description in list_variants().items():
        print(f"{name:6s} {description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starisac",
                                     description="Secure STAR-RIS ISAC beamforming via penalty dual decomposition")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Solve one channel realization")
    solve.add_argument("--config", required=True, help="Scenario JSON (optional \"solver\" section)")
    solve.add_argument("--variant", help="star | cris | noris (defaults to the config)")
    solve.add_argument("--seed", type=int, help="Realization seed (defaults to rng_seed)")
    solve.add_argument("--trace", help="Write the per-iteration trace CSV here")
    solve.add_argument("--out", help="Write the solution summary JSON here")
    solve.set_defaults(handler=_cmd_solve)

    sweep = sub.add_parser("sweep", help="Run a Monte-Carlo experiment plan")
    sweep.add_argument("--plan", required=True, help="Experiment plan JSON")
    sweep.add_argument("--out", help="Output directory (defaults to the plan's output_path)")
    sweep.add_argument("--paper-scale", "--full-scale", dest="full_scale", action="store_true",
                       help="100 realizations at full dimensions")
    sweep.add_argument("--workers", type=int, default=1, help="Worker processes")
    sweep.add_argument("--freeze-positions", action="store_true",
                       help="Reuse the first realization's user positions for every seed")
    sweep.add_argument("--quiet", action="store_true", help="Hide the progress bar")
    sweep.set_defaults(handler=_cmd_sweep)

    bench = sub.add_parser("bench", help="Time inner iterations against N_S")
    bench.add_argument("--ns", default="128,256,512,1024", help="Comma-separated N_S values")
    bench.add_argument("--out", required=True, help="Output JSON")
    bench.add_argument("--config", help="Base scenario JSON")
    bench.add_argument("--iterations", type=int, default=10, help="Inner iterations per N_S")
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(handler=_cmd_bench)

    check = sub.add_parser("check", help="Run the gradient, projection and optimizer test suites")
    check.add_argument("--include-slow", action="store_true", help="Also run slow end-to-end tests")
    check.set_defaults(handler=_cmd_check)

    variants = sub.add_parser("variants", help="List registered system variants")
    variants.set_defaults(handler=_cmd_variants)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG if isinstance(e, json.JSONDecodeError) else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
