# cli/commands.py

"""
Command-line driver.

    python main.py <command> --config PATH [--seed N] [--deterministic] [--paper-scale] [--out DIR]

Commands: train-velocity, distill, train-fmm, evaluate, style-transfer,
oracle-suite, sample. Exit codes: 0 success, 2 configuration or usage error,
3 numeric failure, 4 acceptance failure, 1 anything else.
"""

import argparse
import os
import sys
from typing import Callable, Dict, List, Optional, Tuple

from config.constants import APP_NAME, APP_VERSION, EXIT_INTERNAL, EXIT_OK
from config.experiment import ExperimentConfig
from services import EvaluationService, OracleSuiteService, PipelineService, StyleTransferService
from utils.exceptions import ConfigurationError, FlowMapBaseException
from utils.logger import attach_run_log, detach_run_log, get_logger

from .manifest import RunManifest

# Initialize logger
logger = get_logger(__name__)

Metrics = Dict[str, object]


def _steps(raw: Optional[str]) -> Optional[Tuple[int, ...]]:
    if raw is None:
        return None
    try:
        steps = tuple(int(v) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigurationError(f"--steps must be a comma-separated list of integers, got '{raw}'")
    if not steps or any(n < 1 for n in steps):
        raise ConfigurationError(f"--steps must list positive integers, got '{raw}'")
    return steps


def cmd_train_velocity(config: ExperimentConfig, args: argparse.Namespace) -> Metrics:
    result = PipelineService(config).train_velocity()
    return {"checkpoint": result.checkpoint, "final_loss": result.final_loss}


def cmd_distill(config: ExperimentConfig, args: argparse.Namespace) -> Metrics:
    results = PipelineService(config).distill(args.mode)
    last = results[-1]
    return {"checkpoint": last.checkpoint, "final_loss": last.final_loss, "rounds": len(results)}


def cmd_train_fmm(config: ExperimentConfig, args: argparse.Namespace) -> Metrics:
    result = PipelineService(config).train_direct()
    return {"checkpoint": result.checkpoint, "final_loss": result.final_loss}


def cmd_evaluate(config: ExperimentConfig, args: argparse.Namespace) -> Metrics:
    result = EvaluationService(config).evaluate(args.checkpoint, _steps(args.steps))
    return {f"N{r.n_steps}": r.as_dict() for r in result.reports}


def cmd_sample(config: ExperimentConfig, args: argparse.Namespace) -> Metrics:
    result = EvaluationService(config).sample(args.checkpoint, _steps(args.steps), args.count)
    return {"files": len(result.files)}


def cmd_style_transfer(config: ExperimentConfig, args: argparse.Namespace) -> Metrics:
    report = StyleTransferService(config).run(args.checkpoint, args.s_prime, args.source, args.target)
    return {"in_target_class": report.in_target_class, "cycle_median_error": report.cycle_median_error}


def cmd_oracle_suite(config: ExperimentConfig, args: argparse.Namespace) -> Metrics:
    report = OracleSuiteService(config).run(train_denoiser=not args.skip_training)
    return {"checks": len(report.checks), "passed": report.passed}


COMMANDS: Dict[str, Callable[[ExperimentConfig, argparse.Namespace], Metrics]] = {
    "train-velocity": cmd_train_velocity,
    "distill": cmd_distill,
    "train-fmm": cmd_train_fmm,
    "evaluate": cmd_evaluate,
    "sample": cmd_sample,
    "style-transfer": cmd_style_transfer,
    "oracle-suite": cmd_oracle_suite,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config file")
    common.add_argument("--seed", type=int, default=None, help="override [run] seed")
    common.add_argument("--deterministic", action="store_true", help="single-worker reductions")
    common.add_argument("--paper-scale", action="store_true", help="6x512 network, 5e4 steps")
    common.add_argument("--out", default=None, help="output directory")

    parser = argparse.ArgumentParser(prog="flowmap", description=f"{APP_NAME} {APP_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("train-velocity", parents=[common], help="regress a velocity field")
    distill = sub.add_parser("distill", parents=[common], help="distill a flow map from a teacher")
    distill.add_argument("--mode", choices=["lmd", "emd", "pfmm"], default=None,
                         help="defaults to [loss] kind")
    sub.add_parser("train-fmm", parents=[common], help="train a flow map directly (fmm, ee, denoiser)")

    for name, helptext in (("evaluate", "metric panel for a checkpoint"), ("sample", "draw samples")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--checkpoint", required=True)
        p.add_argument("--steps", default=None, help="comma-separated step counts, e.g. 1,2,4")
        if name == "sample":
            p.add_argument("--count", type=int, default=None)

    style = sub.add_parser("style-transfer", parents=[common], help="class transfer by inversion")
    style.add_argument("--checkpoint", required=True)
    style.add_argument("--s-prime", type=float, default=None)
    style.add_argument("--source", type=int, default=None)
    style.add_argument("--target", type=int, default=None)

    oracle = sub.add_parser("oracle-suite", parents=[common], help="closed-form audits on the Gaussian task")
    oracle.add_argument("--skip-training", action="store_true", help="skip the denoiser collapse training")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    manifest: Optional[RunManifest] = None
    output_dir: Optional[str] = None
    exit_code = EXIT_OK
    try:
        config = ExperimentConfig.load(args.config).with_overrides(
            seed=args.seed, deterministic=args.deterministic,
            paper_scale=args.paper_scale, output_dir=args.out,
        )
        output_dir = config.output_dir
        os.makedirs(output_dir, exist_ok=True)
        attach_run_log(output_dir)
        with open(os.path.join(output_dir, "config.cfg"), "w", encoding="utf-8") as f:
            f.write(config.serialize())
        manifest = RunManifest(command=args.command, config_hash=config.config_hash())
        logger.info(f"{args.command}: config {args.config} (hash {manifest.config_hash[:12]}), "
                    f"output {output_dir}")
        manifest.metrics = COMMANDS[args.command](config, args)
    except FlowMapBaseException as e:
        exit_code = e.exit_code
        logger.error(f"{args.command} failed: {e}")
    except Exception as e:
        exit_code = EXIT_INTERNAL
        logger.error(f"{args.command} failed unexpectedly: {e}", exc_info=True)
    finally:
        if manifest is not None:
            manifest.finish(output_dir, exit_code)
        detach_run_log()
    if exit_code == EXIT_OK:
        logger.info(f"{args.command} finished")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
