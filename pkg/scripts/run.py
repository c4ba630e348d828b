import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

import structlog
from dotenv import load_dotenv

"""
CLI entry point for difficulty-aware training experiments.
This script is located under scripts/ and ensures src/ is on sys.path.
"""

# Ensure src/ is importable for the "src layout"
ROOT_DIR = Path(__file__).resolve().parents[1]
SRC_DIR = ROOT_DIR / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from db.data_access import dump_dataset, load_dataset
from experiments.ablation import run_ablation
from experiments.acceptance import run_checks
from experiments.config import config_keys, parse_config
from pipeline import output_root, run_flow_channel, run_loss_curves, run_training
from shared.errors import EXIT_OK, ConfigError, ModifyError, exit_code_for
from synthdata.dataset import generate_dataset

log = structlog.get_logger("modify.cli")

ACCEPTANCE_PROFILE = ROOT_DIR / "config" / "acceptance.conf"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def setup_logging(level: str = "INFO"):
    # Ensure logs directory exists
    logs_dir = ROOT_DIR / "logs"
    try:
        logs_dir.mkdir(parents=True, exist_ok=True)
    except OSError:
        pass

    # Timestamped log file per run
    ts = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_file = logs_dir / f"run_{ts}.log"

    shared_processors = [
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S"),
    ]
    structlog.configure(
        processors=[structlog.stdlib.filter_by_level, *shared_processors, structlog.stdlib.ProcessorFormatter.wrap_for_formatter],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    formatter = structlog.stdlib.ProcessorFormatter(
        processor=structlog.dev.ConsoleRenderer(colors=False),
        foreign_pre_chain=shared_processors,
    )

    # Configure root logger with console + file handlers
    logger = logging.getLogger()
    logger.setLevel(level.upper())

    # Clear any pre-existing handlers to avoid duplicate logs
    logger.handlers.clear()

    ch = logging.StreamHandler(sys.stdout)
    ch.setFormatter(formatter)
    logger.addHandler(ch)

    try:
        fh = logging.FileHandler(str(log_file), encoding="utf-8")
        fh.setFormatter(formatter)
        logger.addHandler(fh)
        log.info("logging to file", path=str(log_file))
    except OSError as e:
        log.warning("could not create log file", path=str(log_file), error=str(e))


def _load_env():
    load_dotenv(override=False)
    config_env = ROOT_DIR / "config" / ".env"
    if config_env.exists():
        load_dotenv(dotenv_path=config_env, override=False)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Flat key=value config file")
    common.add_argument(
        "--log-level", default="INFO", type=str.upper, choices=LOG_LEVELS, help="Logging level (default INFO)"
    )
    common.add_argument("--no-timestamp", action="store_true", help="Omit the generation timestamp from SVG files")
    common.add_argument("--data-dir", default=None, help="Directory holding train.mdfy/eval.mdfy")
    group = common.add_argument_group("training configuration (overrides the config file)")
    for key, flag in config_keys():
        group.add_argument(flag, dest=f"cfg_{key}", default=None, metavar=key.upper())
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(description="Difficulty-aware training on a synthetic color-shift task")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-data", parents=[common], help="Generate the dataset and write it as MDFY files")
    sub.add_parser("train", parents=[common], help="Train one mode on one seed")
    ablation = sub.add_parser("ablation", parents=[common], help="Six modes x seeds, with per-domain accuracy tables")
    ablation.add_argument("--seeds", default="0", help="Comma-separated seeds (default 0)")
    sub.add_parser("flow-channel", parents=[common], help="FULL-mode run plus the capability/augmentation plot data")
    sub.add_parser("loss-curves", parents=[common], help="No-DA, MoDify and Strong-DA loss curves on one seed")
    verify = sub.add_parser("verify", parents=[common], help="Run the acceptance checks")
    verify.add_argument("--full", action="store_true", help="Also run the training-scale directional checks")
    return parser


def _overrides(args) -> dict:
    return {key: getattr(args, f"cfg_{key}") for key, _ in config_keys()}


def _dataset(args):
    return load_dataset(args.data_dir) if args.data_dir else None


def _seeds(raw: str):
    try:
        return [int(s) for s in raw.split(",") if s.strip()]
    except ValueError:
        raise ConfigError("seeds", f"expected comma-separated integers, got {raw!r}") from None


def dispatch(args) -> int:
    timestamp = not args.no_timestamp
    if args.command == "gen-data":
        config = parse_config(args.config, _overrides(args), require_mode=False)
        target = Path(args.data_dir) if args.data_dir else output_root(config) / "data"
        paths = dump_dataset(target, generate_dataset(config))
        log.info("dataset written", **{k: str(p) for k, p in paths.items()})
        return EXIT_OK

    if args.command == "train":
        config = parse_config(args.config, _overrides(args))
        result, run_dir = run_training(config, dataset=_dataset(args))
        log.info("done", output=str(run_dir), **{k: round(v, 4) for k, v in result.accuracies.items()})
        return EXIT_OK

    if args.command == "ablation":
        config = parse_config(args.config, _overrides(args), require_mode=False)
        report = run_ablation(config, _seeds(args.seeds))
        if report.failures:
            log.error("ablation incomplete", failures=[f"{f.mode.value}/s{f.seed}" for f in report.failures])
            return report.failures[0].exit_code
        return EXIT_OK

    if args.command == "flow-channel":
        config = parse_config(args.config, _overrides(args), require_mode=False)
        run_dir = run_flow_channel(config, dataset=_dataset(args), timestamp=timestamp)
        log.info("done", output=str(run_dir))
        return EXIT_OK

    if args.command == "loss-curves":
        config = parse_config(args.config, _overrides(args), require_mode=False)
        out_dir = run_loss_curves(config, dataset=_dataset(args), timestamp=timestamp)
        log.info("done", output=str(out_dir))
        return EXIT_OK

    if args.command == "verify":
        profile = parse_config(args.config or ACCEPTANCE_PROFILE, _overrides(args), require_mode=False)
        results = run_checks(full=args.full, profile=profile, root=output_root(profile) / "verify")
        print(f"{'#':>3}  {'check':<34} {'result':<6} {'seconds':>8}  detail")
        for r in results:
            print(f"{r.number:>3}  {r.name:<34} {'PASS' if r.passed else 'FAIL':<6} {r.seconds:>8.2f}  {r.detail}")
        return EXIT_OK if all(r.passed for r in results) else 1

    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    _load_env()
    log.info("starting", command=args.command, config=args.config)
    try:
        code = dispatch(args)
    except ModifyError as e:
        code = exit_code_for(e)
        log.error("aborted", error_type=type(e).__name__, error=str(e), exit_code=code)
    return code


if __name__ == "__main__":
    sys.exit(main())
