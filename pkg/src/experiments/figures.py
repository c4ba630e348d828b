from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd
import structlog
from scipy.stats import spearmanr

from experiments.svg import gradient_color, line_plot, scatter
from experiments.tables import metrics_frame, write_csv
from scheduler.gates import gated_mean_loss
from shared.errors import DataError
from shared.types import MetricsRecord

log = structlog.get_logger(__name__)

FLOW_CHANNEL_COLUMNS = ["window_start_iter", "mean_m_c", "mean_degree", "mean_applied_rate"]
LOSS_CURVE_COLUMNS = ["iter", "loss_no_da", "loss_modify", "loss_strong_da"]
TERMINAL_FRACTION = 0.1


def per_iteration(records: Sequence[MetricsRecord]) -> pd.DataFrame:
    """One row per iteration: capability, mean degree, realized augmentation rate and training loss.

    The training loss is the mean over samples the gate kept, as in the optimized step.
    """
    if not records:
        raise DataError("metrics log is empty")
    frame = metrics_frame(list(records))
    frame["applied"] = frame["applied"].astype(float)
    grouped = frame.groupby("iter", sort=True)
    loss = grouped[["loss_no", "w"]].apply(lambda g: gated_mean_loss(g["loss_no"], g["w"]))
    return pd.DataFrame(
        {
            "iter": grouped["iter"].first(),
            "m_c": grouped["m_c"].mean(),
            "degree": grouped["degree"].mean(),
            "applied": grouped["applied"].mean(),
            "loss": loss,
        }
    ).reset_index(drop=True)


def flow_channel_table(records: Sequence[MetricsRecord], window: int = 50) -> pd.DataFrame:
    """Consecutive windows of `window` iterations; a trailing partial window is kept."""
    if window < 1:
        raise ValueError("window must be at least 1")
    iters = per_iteration(records)
    block = np.arange(len(iters)) // window
    grouped = iters.groupby(block, sort=True)
    return pd.DataFrame(
        {
            "window_start_iter": grouped["iter"].first().astype(np.int64),
            "mean_m_c": grouped["m_c"].mean(),
            "mean_degree": grouped["degree"].mean(),
            "mean_applied_rate": grouped["applied"].mean(),
        },
        columns=FLOW_CHANNEL_COLUMNS,
    ).reset_index(drop=True)


def flow_channel_correlation(table: pd.DataFrame) -> float:
    """Spearman rank correlation between windowed capability and windowed augmentation rate."""
    if len(table) < 2:
        return float("nan")
    return float(spearmanr(table["mean_m_c"], table["mean_applied_rate"])[0])


def emit_flow_channel(records: Sequence[MetricsRecord], out_dir: str | Path, window: int = 50, timestamp: bool = True) -> pd.DataFrame:
    out_dir = Path(out_dir)
    table = flow_channel_table(records, window)
    write_csv(table, out_dir / "flow_channel.csv")
    n = len(table)
    colors = [gradient_color(i / (n - 1) if n > 1 else 0.0) for i in range(n)]
    svg = scatter(
        table["mean_m_c"].tolist(),
        table["mean_applied_rate"].tolist(),
        title="Capability vs. augmentation rate (red = early, blue = late)",
        x_label="mean capability M_c",
        y_label="realized augmentation rate",
        colors=colors,
        timestamp=timestamp,
    )
    (out_dir / "flow_channel.svg").write_text(svg, encoding="utf-8")
    log.info("flow channel written", path=str(out_dir), windows=n, spearman=round(flow_channel_correlation(table), 4))
    return table


def loss_curve_table(
    no_da: Sequence[MetricsRecord],
    modify: Sequence[MetricsRecord],
    strong_da: Sequence[MetricsRecord],
    smooth: int = 100,
) -> pd.DataFrame:
    """Per-iteration mean training loss of each arm, smoothed with a trailing mean."""
    if smooth < 1:
        raise ValueError("smoothing window must be at least 1")
    curves: Dict[str, pd.Series] = {}
    for name, records in (("loss_no_da", no_da), ("loss_modify", modify), ("loss_strong_da", strong_da)):
        curves[name] = per_iteration(records)["loss"]
    lengths = {name: len(c) for name, c in curves.items()}
    if len(set(lengths.values())) != 1:
        raise DataError(f"runs have different iteration counts: {lengths}")
    table = pd.DataFrame({"iter": np.arange(lengths["loss_no_da"], dtype=np.int64)})
    for name, curve in curves.items():
        table[name] = curve.rolling(smooth, min_periods=1).mean().to_numpy()
    return table[LOSS_CURVE_COLUMNS]


def terminal_losses(table: pd.DataFrame) -> Dict[str, float]:
    tail = max(1, int(round(len(table) * TERMINAL_FRACTION)))
    return {name: float(table[name].iloc[-tail:].mean()) for name in LOSS_CURVE_COLUMNS[1:]}


def emit_loss_curves(
    no_da: Sequence[MetricsRecord],
    modify: Sequence[MetricsRecord],
    strong_da: Sequence[MetricsRecord],
    out_dir: str | Path,
    smooth: int = 100,
    timestamp: bool = True,
) -> pd.DataFrame:
    out_dir = Path(out_dir)
    table = loss_curve_table(no_da, modify, strong_da, smooth)
    write_csv(table, out_dir / "loss_curves.csv")
    series: Dict[str, List[float]] = {
        "No-DA": table["loss_no_da"].tolist(),
        "MoDify": table["loss_modify"].tolist(),
        "Strong-DA": table["loss_strong_da"].tolist(),
    }
    svg = line_plot(table["iter"].tolist(), series, "Smoothed training loss", "iteration", "loss", timestamp=timestamp)
    (out_dir / "loss_curves.svg").write_text(svg, encoding="utf-8")
    log.info("loss curves written", path=str(out_dir), iterations=len(table), **{k: round(v, 4) for k, v in terminal_losses(table).items()})
    return table
