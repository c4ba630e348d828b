import hashlib
import json
import os
from pathlib import Path
from typing import Dict, Optional, Tuple

import pandas as pd
import structlog

from experiments.figures import emit_flow_channel, emit_loss_curves
from experiments.tables import metrics_frame, write_csv
from shared.types import Mode, TrainConfig
from synthdata.dataset import DatasetSplit, generate_dataset
from trainer.loop import RunResult, train

log = structlog.get_logger(__name__)

ROOT = Path(__file__).resolve().parents[1]

# Keys that name, place or report on a run without changing what it computes.
_IDENTITY_KEYS = {"mode", "seed", "out_dir", "workers", "window", "smooth", "checkpoint_every"}

LOSS_CURVE_ARMS = (Mode.BASELINE, Mode.FULL, Mode.STRONG_DA)


def output_root(config: Optional[TrainConfig] = None) -> Path:
    if config is not None and config.out_dir:
        return Path(config.out_dir)
    return Path(os.getenv("MODIFY_OUT") or ROOT / "outputs")


def config_hash(config: TrainConfig) -> str:
    payload = config.model_dump(mode="json", by_alias=True, exclude=_IDENTITY_KEYS)
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()[:8]


def run_dir_for(config: TrainConfig, root: Optional[Path] = None) -> Path:
    root = root if root is not None else output_root(config)
    return root / f"{config.mode.value}_s{config.seed}_{config_hash(config)}"


def finished_accuracies(run_dir: Path) -> Optional[Dict[str, float]]:
    result = run_dir / "result.json"
    if not result.exists():
        return None
    return json.loads(result.read_text(encoding="utf-8"))["accuracies"]


def run_training(config: TrainConfig, root: Optional[Path] = None, dataset: Optional[DatasetSplit] = None) -> Tuple[RunResult, Path]:
    """Train (resuming from the run directory's checkpoint) and write the run's files."""
    run_dir = run_dir_for(config, root)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(config.model_dump_json(by_alias=True, indent=2), encoding="utf-8")
    log.info("run directory", path=str(run_dir))

    result = train(config, dataset=dataset, run_dir=run_dir, resume=True)

    write_csv(metrics_frame(result.metrics), run_dir / "metrics.csv")
    write_csv(
        pd.DataFrame({"domain": list(result.accuracies), "accuracy": list(result.accuracies.values())}),
        run_dir / "accuracy.csv",
    )
    summary = {
        "mode": config.mode.value,
        "seed": config.seed,
        "config_hash": config_hash(config),
        "accuracies": result.accuracies,
        "mean_target_accuracy": result.mean_target_accuracy,
        "seconds": result.seconds,
    }
    (run_dir / "result.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    log.info("output written", path=str(run_dir))
    return result, run_dir


def run_flow_channel(config: TrainConfig, root: Optional[Path] = None, dataset: Optional[DatasetSplit] = None, timestamp: bool = True) -> Path:
    """FULL-mode run, then the windowed capability/augmentation table and scatter in its run directory."""
    config = config.model_copy(update={"mode": Mode.FULL})
    result, run_dir = run_training(config, root=root, dataset=dataset)
    emit_flow_channel(result.metrics, run_dir, window=config.window, timestamp=timestamp)
    return run_dir


def run_loss_curves(config: TrainConfig, root: Optional[Path] = None, dataset: Optional[DatasetSplit] = None, timestamp: bool = True) -> Path:
    """No-DA, MoDify and Strong-DA arms on one seed and dataset, smoothed side by side."""
    root = root if root is not None else output_root(config)
    dataset = dataset if dataset is not None else generate_dataset(config)
    arms = [run_training(config.model_copy(update={"mode": m}), root=root, dataset=dataset)[0] for m in LOSS_CURVE_ARMS]
    out_dir = root / f"loss_curves_s{config.seed}_{config_hash(config)}"
    out_dir.mkdir(parents=True, exist_ok=True)
    emit_loss_curves(arms[0].metrics, arms[1].metrics, arms[2].metrics, out_dir, smooth=config.smooth, timestamp=timestamp)
    return out_dir
