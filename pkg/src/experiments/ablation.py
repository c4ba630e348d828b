from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel

from experiments.tables import write_csv
from pipeline import finished_accuracies, output_root, run_dir_for, run_training
from shared.errors import ModifyError, exit_code_for
from shared.types import ABLATION_MODES, Mode, TrainConfig
from synthdata.dataset import DatasetSplit, generate_dataset

log = structlog.get_logger(__name__)

ABLATION_FILE = "ablation.csv"
SUMMARY_FILE = "ablation_summary.csv"


class AblationRow(BaseModel):
    mode: Mode
    domain: str
    seed: int
    accuracy: float


class SummaryRow(BaseModel):
    mode: Mode
    domain: str
    mean: float
    std: float
    n: int


class RunFailure(BaseModel):
    mode: Mode
    seed: int
    error: str
    exit_code: int


class AblationReport(BaseModel):
    rows: List[AblationRow]
    summary: List[SummaryRow]
    failures: List[RunFailure] = []

    def mean_target_accuracy(self, mode: Mode) -> float:
        values = [r.accuracy for r in self.rows if r.mode == mode and r.domain != "source"]
        return float(np.mean(values)) if values else float("nan")


def _run_one(config: TrainConfig, root: str, dataset: Optional[DatasetSplit] = None) -> Tuple[Dict[str, float], bool]:
    """Accuracies of one (mode, seed) run and whether they were loaded from a finished run directory."""
    done = finished_accuracies(run_dir_for(config, Path(root)))
    if done is not None:
        return done, True
    result, _ = run_training(config, root=Path(root), dataset=dataset)
    return result.accuracies, False


def summarize(rows: Sequence[AblationRow]) -> List[SummaryRow]:
    """Mean and sample standard deviation (0 for a single seed) per (mode, domain), in row order."""
    if not rows:
        return []
    frame = pd.DataFrame([r.model_dump() for r in rows])
    grouped = frame.groupby(["mode", "domain"], sort=False)["accuracy"]
    stats = pd.DataFrame({"mean": grouped.mean(), "std": grouped.std(ddof=1).fillna(0.0), "n": grouped.size()}).reset_index()
    return [
        SummaryRow(mode=rec["mode"], domain=rec["domain"], mean=float(rec["mean"]), std=float(rec["std"]), n=int(rec["n"]))
        for rec in stats.to_dict(orient="records")
    ]


def _frame(rows: Sequence[BaseModel], columns: List[str]) -> pd.DataFrame:
    records = []
    for r in rows:
        rec = r.model_dump()
        rec["mode"] = rec["mode"].value
        records.append(rec)
    return pd.DataFrame(records, columns=columns)


def run_ablation(config: TrainConfig, seeds: Sequence[int], root: Optional[Path] = None, workers: Optional[int] = None) -> AblationReport:
    """Six modes x seeds; finished runs are reused, aborted runs are reported and skipped."""
    if not seeds:
        raise ValueError("at least one seed is required")
    root = Path(root) if root is not None else output_root(config)
    root.mkdir(parents=True, exist_ok=True)
    workers = workers or config.workers
    jobs = [(mode, seed) for mode in ABLATION_MODES for seed in seeds]
    configs = {job: config.model_copy(update={"mode": job[0], "seed": job[1]}) for job in jobs}
    log.info("ablation started", modes=len(ABLATION_MODES), seeds=list(seeds), workers=workers, root=str(root))

    outcomes: Dict[Tuple[Mode, int], Dict[str, float]] = {}
    failures: List[RunFailure] = []

    def record(job, fn):
        try:
            accuracies, reused = fn()
        except ModifyError as e:
            log.error("run aborted", mode=job[0].value, seed=job[1], error=str(e))
            failures.append(RunFailure(mode=job[0], seed=job[1], error=str(e), exit_code=exit_code_for(e)))
            return
        if reused:
            log.info("run already finished, skipped", mode=job[0].value, seed=job[1])
        outcomes[job] = accuracies

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {job: pool.submit(_run_one, configs[job], str(root)) for job in jobs}
            for job in jobs:
                record(job, futures[job].result)
    else:
        datasets: Dict[int, DatasetSplit] = {}
        for job in jobs:
            seed = job[1]
            if seed not in datasets:
                datasets[seed] = generate_dataset(configs[job])
            record(job, lambda: _run_one(configs[job], str(root), datasets[seed]))

    rows = [
        AblationRow(mode=mode, domain=domain, seed=seed, accuracy=acc)
        for mode, seed in jobs
        if (mode, seed) in outcomes
        for domain, acc in outcomes[(mode, seed)].items()
    ]
    failures.sort(key=lambda f: jobs.index((f.mode, f.seed)))
    report = AblationReport(rows=rows, summary=summarize(rows), failures=failures)
    write_csv(_frame(report.rows, ["mode", "domain", "seed", "accuracy"]), root / ABLATION_FILE)
    write_csv(_frame(report.summary, ["mode", "domain", "mean", "std", "n"]), root / SUMMARY_FILE)
    log.info(
        "ablation finished",
        rows=len(rows),
        failures=len(failures),
        **{f"target_{m.value}": round(report.mean_target_accuracy(m), 4) for m in ABLATION_MODES},
    )
    return report
