"""
Mutable training state and its checkpoint encoding.

Random streams are keyed by (seed, purpose, epoch, sample id), so the epoch
counter fully determines the RNG state at an epoch boundary.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from lossbank.bank import LossBank, from_arrays as bank_from_arrays, to_arrays as bank_to_arrays
from numerics.network import Gradient, ParameterSet
from numerics.optim import OptimizerState
from scheduler.capability import CapabilityTracker
from shared.types import EpochSummary, MetricsRecord

METRIC_COLUMNS = ("iter", "epoch", "sample_id", "loss_da", "loss_no", "d_da", "d_no", "degree", "applied", "w", "m_c", "lr")
_INT_COLUMNS = {"iter", "epoch", "sample_id"}
_OPTIONAL_COLUMNS = {"loss_da", "d_da", "d_no"}


@dataclass
class TrainState:
    params: ParameterSet
    opt: OptimizerState
    bank: LossBank
    tracker: CapabilityTracker
    epoch: int = 0
    metrics: List[MetricsRecord] = field(default_factory=list)
    summaries: List[EpochSummary] = field(default_factory=list)


def metrics_to_columns(records: List[MetricsRecord]) -> Dict[str, np.ndarray]:
    cols: Dict[str, np.ndarray] = {}
    for name in METRIC_COLUMNS:
        values = [getattr(r, name) for r in records]
        if name in _INT_COLUMNS:
            cols[name] = np.asarray(values, dtype=np.int64)
        elif name == "applied":
            cols[name] = np.asarray(values, dtype=bool)
        else:
            cols[name] = np.asarray([math.nan if v is None else v for v in values], dtype=np.float64)
    return cols


def metrics_from_columns(cols: Dict[str, np.ndarray]) -> List[MetricsRecord]:
    n = len(cols["iter"])
    records = []
    for i in range(n):
        row = {}
        for name in METRIC_COLUMNS:
            v = cols[name][i]
            if name in _INT_COLUMNS:
                row[name] = int(v)
            elif name == "applied":
                row[name] = bool(v)
            elif name in _OPTIONAL_COLUMNS and math.isnan(v):
                row[name] = None
            else:
                row[name] = float(v)
        records.append(MetricsRecord(**row))
    return records


def pack_state(state: TrainState) -> Dict[str, np.ndarray]:
    arrays: Dict[str, np.ndarray] = {}
    buffers = state.opt.buffers or Gradient.zeros_like(state.params)
    for k, (w, b) in enumerate(zip(state.params.weights, state.params.biases)):
        arrays[f"w{k}"] = w
        arrays[f"b{k}"] = b
        arrays[f"buf_w{k}"] = buffers.weights[k]
        arrays[f"buf_b{k}"] = buffers.biases[k]
    arrays.update(bank_to_arrays(state.bank))
    arrays["tracker"] = np.array([state.tracker.loss_min, state.tracker.loss_max, state.tracker.count], dtype=np.float64)
    arrays["opt_iter"] = np.int64(state.opt.iter)
    arrays["epoch"] = np.int64(state.epoch)
    for name, col in metrics_to_columns(state.metrics).items():
        arrays[f"m_{name}"] = col
    arrays["summaries"] = np.array(
        [[s.epoch, s.mean_loss, s.aug_rate, s.gate_rate, s.lr] for s in state.summaries], dtype=np.float64
    ).reshape(-1, 5)
    return arrays


def unpack_state(arrays, opt_template: OptimizerState) -> TrainState:
    n_layers = sum(1 for key in arrays if key.startswith("w") and key[1:].isdigit())
    params = ParameterSet([arrays[f"w{k}"].copy() for k in range(n_layers)], [arrays[f"b{k}"].copy() for k in range(n_layers)])
    buffers = Gradient([arrays[f"buf_w{k}"].copy() for k in range(n_layers)], [arrays[f"buf_b{k}"].copy() for k in range(n_layers)])
    opt = OptimizerState(
        base_lr=opt_template.base_lr,
        momentum=opt_template.momentum,
        weight_decay=opt_template.weight_decay,
        power=opt_template.power,
        max_iter=opt_template.max_iter,
        iter=int(arrays["opt_iter"]),
        buffers=buffers,
    )
    t_min, t_max, t_count = arrays["tracker"]
    tracker = CapabilityTracker(loss_min=float(t_min), loss_max=float(t_max), count=int(t_count))
    metrics = metrics_from_columns({name: arrays[f"m_{name}"] for name in METRIC_COLUMNS})
    summaries = [
        EpochSummary(epoch=int(row[0]), mean_loss=row[1], aug_rate=row[2], gate_rate=row[3], lr=row[4])
        for row in arrays["summaries"]
    ]
    return TrainState(
        params=params,
        opt=opt,
        bank=bank_from_arrays(arrays),
        tracker=tracker,
        epoch=int(arrays["epoch"]),
        metrics=metrics,
        summaries=summaries,
    )
