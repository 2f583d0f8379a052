# bench_cli.py — command-line entry point for runs, comparisons, oracle validation
# and reference-front export.
#
#   python bench_cli.py run --preset fig4 --algorithm attention --out results
#   python bench_cli.py compare --preset fig4 --a attention --b lmocso --out results
#   python bench_cli.py validate
#   python bench_cli.py front-oracle --preset fig4 --output mcs_front.csv
#
# Exit codes: 0 ok, 1 comparison verdict false or a validation suite failed,
# 2 invalid configuration, 3 filesystem error, 4 any other optimizer error.

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import experiment
import run_store
import validation
from config import ExperimentConfig, get_runtime_config, load_config
from errors import InvalidConfigError, MoeaError, RunStoreError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _exit_code_for(exc: MoeaError) -> int:
    if isinstance(exc, InvalidConfigError):
        return EXIT_CONFIG
    if isinstance(exc, RunStoreError):
        return EXIT_IO
    return EXIT_INTERNAL


def _add_config_flags(p: argparse.ArgumentParser, *, with_algorithm: bool = True) -> None:
    p.add_argument("--config", help="JSON config file (keys are ExperimentConfig fields)")
    p.add_argument("--preset", help="Named preset applied before the config file (fig4 or its alias mcs300, zdt1)")
    p.add_argument("--seed", type=int, action="append", dest="seeds", help="Seed to run; repeat for several")
    p.add_argument("--out", dest="out_dir", help="Output directory")
    p.add_argument("--problem", choices=["mcs", "zdt1", "zdt2"])
    if with_algorithm:
        p.add_argument("--algorithm", choices=["attention", "lmocso"])
    p.add_argument("--n", type=int, help="Decision dimension (sensor count for mcs)")
    p.add_argument("--d", type=int, help="Population size")
    p.add_argument("--k", type=int, help="Query dimension")
    p.add_argument("--g", type=int, help="Attention offspring per generation")
    p.add_argument("--fe-budget", type=int, dest="fe_budget")
    p.add_argument("--trace-every", type=int, dest="trace_every")
    p.add_argument("--reference-points", type=int, dest="reference_points")
    p.add_argument("--archive", action="store_true", default=None, help="Trace a cumulative non-dominated archive")
    p.add_argument(
        "--pure-attention",
        action=argparse.BooleanOptionalAction,
        default=None,
        dest="pure_attention",
        help="Attention offspring only (--no-pure-attention restores the hybrid scheme)",
    )


_OVERRIDE_KEYS = (
    "seeds", "out_dir", "problem", "algorithm", "n", "d", "k", "g", "fe_budget",
    "trace_every", "reference_points", "archive", "pure_attention",
)


def _overrides(args: argparse.Namespace, **extra: Any) -> Dict[str, Any]:
    values = {key: getattr(args, key, None) for key in _OVERRIDE_KEYS}
    values.update(extra)
    return {k: v for k, v in values.items() if v is not None}


def _config_from_args(args: argparse.Namespace, path: Optional[str] = None, **extra: Any) -> ExperimentConfig:
    return load_config(path if path is not None else args.config, preset=args.preset, overrides=_overrides(args, **extra))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench_cli",
        description="Attention-guided large-scale MOEA vs LMOCSO: runs, comparisons and oracle validation",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="DEBUG logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="One optimizer run per seed; writes trace, front and manifest files")
    _add_config_flags(p_run)

    p_cmp = sub.add_parser("compare", help="Per-seed HV/IGD comparison of two configurations")
    _add_config_flags(p_cmp, with_algorithm=False)
    p_cmp.add_argument("--config-a", dest="config_a", help="Config file for side a (defaults to --config)")
    p_cmp.add_argument("--config-b", dest="config_b", help="Config file for side b (defaults to --config)")
    p_cmp.add_argument("--a", dest="algorithm_a", choices=["attention", "lmocso"], help="Algorithm for side a")
    p_cmp.add_argument("--b", dest="algorithm_b", choices=["attention", "lmocso"], help="Algorithm for side b")
    p_cmp.add_argument("--report", help="Comparison CSV path (default: <out>/comparison_<a>_vs_<b>_<problem>.csv)")

    p_val = sub.add_parser("validate", help="Run the oracle suites")
    p_val.add_argument("--suite", action="append", dest="suites", choices=sorted(validation.SUITES))

    p_front = sub.add_parser("front-oracle", help="Write the reference front of the configured problem")
    _add_config_flags(p_front, with_algorithm=False)
    p_front.add_argument("--output", help="CSV path (default: <out>/reference_fronts/<instance>-w<points>.csv)")
    return parser


# =============================================================================
# Commands
# =============================================================================

def cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    results = experiment.run(config)
    for res in results:
        print(f"seed={res.seed} fe={res.final_fe} hv={res.final_hv:.6f} igd={res.final_igd:.6f} -> {res.paths['trace']}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    config_a = _config_from_args(args, path=args.config_a or args.config, algorithm=args.algorithm_a)
    config_b = _config_from_args(args, path=args.config_b or args.config, algorithm=args.algorithm_b)
    report = experiment.compare(config_a, config_b, report_path=args.report)
    print(f"{'seed':>6} {'hv_a':>10} {'hv_b':>10} {'igd_a':>10} {'igd_b':>10}")
    for row in report.rows:
        print(f"{row['seed']:>6} {row['hv_a']:>10.6f} {row['hv_b']:>10.6f} {row['igd_a']:>10.6f} {row['igd_b']:>10.6f}")
    print(
        f"median hv {report.median_hv_a:.6f} vs {report.median_hv_b:.6f} "
        f"(wins {report.hv_wins_a}/{report.hv_wins_b}); "
        f"median igd {report.median_igd_a:.6f} vs {report.median_igd_b:.6f} "
        f"(wins {report.igd_wins_a}/{report.igd_wins_b})"
    )
    label = "neutral" if report.neutral else ("a holds" if report.verdict else "a does not hold")
    print(f"verdict: {label} -> {report.report_path}")
    return EXIT_OK if report.verdict else EXIT_VERDICT


def cmd_validate(args: argparse.Namespace) -> int:
    report = validation.validate(args.suites)
    failed = report.failures()
    print(f"{len(report.results) - len(failed)}/{len(report.results)} suites passed")
    return EXIT_OK if report.passed else EXIT_VERDICT


def cmd_front_oracle(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    problem, reference, _ = experiment.prepare_problem(config)
    path = args.output or run_store.reference_front_path(config.out_dir, experiment.reference_key(problem, config))
    run_store.write_reference_front(path, reference, problem.objective_names)
    print(f"{reference.shape[0]} reference points -> {path}")
    instance = getattr(problem, "instance", None)
    if instance is not None and instance.positions is not None:
        layout = run_store.write_sensor_layout(run_store.sensor_layout_path(path), instance.positions, instance.gain)
        print(f"{instance.n} sensors -> {layout}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "validate": cmd_validate,
    "front-oracle": cmd_front_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = "DEBUG" if args.verbose else get_runtime_config()["log_level"]
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format="%(asctime)s [%(levelname)s] %(message)s")
    try:
        return COMMANDS[args.command](args)
    except MoeaError as e:
        code = _exit_code_for(e)
        field = getattr(e, "field", None)
        logger.error("%s failed: %s%s", args.command, e, f" (field: {field})" if field else "")
        return code
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
