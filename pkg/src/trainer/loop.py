import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import structlog

from augment.rgb_shuffle import maybe_augment, sample_rng
from db.data_access import load_checkpoint, save_checkpoint
from lossbank.bank import LossBank, difficulty_many, init_bank, update_many
from numerics.network import ParameterSet, backward_from_cache, cross_entropy, forward, forward_cached, init_params, predict
from numerics.optim import OptimizerState, poly_lr, sgd_step
from scheduler.capability import CapabilityTracker, capability, observe_extrema
from scheduler.gates import GateThresholds, da_degree, gated_mean_loss, no_gate_many
from shared.errors import ConfigError, DataError, DivergenceError
from shared.seeding import Purpose, stream
from shared.types import EpochSummary, MetricsRecord, Mode, TrainConfig
from synthdata.dataset import DatasetSplit, Sample, generate_dataset, stack
from trainer.modes import AUG_ALWAYS, AUG_DIFFICULTY, ModePolicy, policy_for
from trainer.state import TrainState, pack_state, unpack_state

log = structlog.get_logger(__name__)

CHECKPOINT_NAME = "checkpoint.npz"


@dataclass
class RunResult:
    config: TrainConfig
    params: ParameterSet
    bank: LossBank
    tracker: CapabilityTracker
    accuracies: Dict[str, float]
    metrics: List[MetricsRecord] = field(default_factory=list)
    epochs: List[EpochSummary] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def mean_target_accuracy(self) -> float:
        targets = [acc for name, acc in self.accuracies.items() if name != "source"]
        return float(np.mean(targets)) if targets else float("nan")


def _require_finite(losses: np.ndarray, stage: str, epoch: int, iteration: int) -> None:
    if not np.all(np.isfinite(losses)):
        raise DivergenceError(f"non-finite {stage} loss at epoch {epoch}, iteration {iteration}")


def _degrees(policy: ModePolicy, d_da: Optional[np.ndarray], n: int) -> np.ndarray:
    if policy.augmentation == AUG_ALWAYS:
        return np.ones(n)
    if policy.augmentation == AUG_DIFFICULTY:
        return np.array([da_degree(float(d)) for d in d_da])
    return np.zeros(n)


def _jitter_amplitude(policy: ModePolicy, config: TrainConfig, degree: float) -> float:
    if policy.strong_jitter:
        return config.jitter_amplitude
    return config.jitter_amplitude * degree if config.jitter else 0.0


def train_step(state: TrainState, batch: Sequence[Sample], mode: Mode, config: TrainConfig, epoch: int) -> List[MetricsRecord]:
    """One iteration of the dual flow over a mini-batch.

    Order: original-image loss (no backprop) -> d_da -> bank update -> augmentation with
    probability 1 - d_da -> augmented-image loss -> d_no -> gate -> weighted step
    (skipped when every gate is closed) -> capability. Per-sample quantities are
    computed element-wise; all d_da are read before the batch writes the bank.
    """
    policy = policy_for(mode)
    iteration = state.opt.iter
    x, y, ids = stack(batch)
    if ids.max() >= state.bank.size:
        raise DataError(f"sample id {int(ids.max())} outside the bank of size {state.bank.size}")

    loss_da = d_da = None
    if policy.da_flow:
        loss_da = cross_entropy(forward(state.params, x), y)
        _require_finite(loss_da, "original-image", epoch, iteration)
        d_da = difficulty_many(state.bank, loss_da)
        update_many(state.bank, ids, loss_da)

    degrees = _degrees(policy, d_da, len(batch))
    images, decisions = [], []
    for sample, degree in zip(batch, degrees):
        rng = sample_rng(config.seed, epoch, sample.id)
        image, decision = maybe_augment(sample.image, float(degree), rng, _jitter_amplitude(policy, config, float(degree)))
        images.append(image.reshape(-1))
        decisions.append(decision)

    cache = forward_cached(state.params, np.stack(images))
    loss_no = cross_entropy(cache.logits, y)
    _require_finite(loss_no, "training", epoch, iteration)
    d_no = difficulty_many(state.bank, loss_no) if policy.da_flow else None
    weights = no_gate_many(d_no, GateThresholds.from_config(config)) if policy.gate else np.ones(len(batch))

    lr = poly_lr(state.opt)
    if weights.any():
        grad = backward_from_cache(state.params, cache, y, weights)
        state.params = sgd_step(state.params, grad, state.opt, lr)
    state.opt.advance()

    # Capability follows the loss the step actually optimized.
    iter_loss = gated_mean_loss(loss_no, weights)
    observe_extrema(state.tracker, iter_loss)
    m_c = capability(state.tracker, iter_loss)

    return [
        MetricsRecord(
            iter=iteration,
            epoch=epoch,
            sample_id=int(ids[i]),
            loss_da=None if loss_da is None else float(loss_da[i]),
            loss_no=float(loss_no[i]),
            d_da=None if d_da is None else float(d_da[i]),
            d_no=None if d_no is None else float(d_no[i]),
            degree=float(degrees[i]),
            applied=decisions[i].applied,
            w=float(weights[i]),
            m_c=m_c,
            lr=lr,
        )
        for i in range(len(batch))
    ]


def evaluate(params: ParameterSet, samples: Sequence[Sample]) -> float:
    """Fraction of argmax-correct predictions."""
    if not samples:
        raise ValueError("cannot evaluate on an empty sample list")
    x, y, _ = stack(samples)
    return float(np.mean(predict(params, x) == y))


def _optimizer(config: TrainConfig, n_train: int) -> OptimizerState:
    return OptimizerState(
        base_lr=config.base_lr,
        momentum=config.momentum,
        weight_decay=config.weight_decay,
        power=config.poly_power,
        max_iter=config.epochs * -(-n_train // config.batch),
    )


def fresh_state(config: TrainConfig, n_train: int) -> TrainState:
    layer_sizes = [config.input_dim, *config.hidden, config.num_classes]
    return TrainState(
        params=init_params(layer_sizes, stream(config.seed, Purpose.INIT)),
        opt=_optimizer(config, n_train),
        bank=init_bank(n_train, config.effective_alpha, config.lam),
        tracker=CapabilityTracker(),
    )


def _summarize(epoch: int, records: List[MetricsRecord]) -> EpochSummary:
    return EpochSummary(
        epoch=epoch,
        mean_loss=float(np.mean([r.loss_no for r in records])),
        aug_rate=float(np.mean([r.applied for r in records])),
        gate_rate=float(np.mean([r.w for r in records])),
        lr=records[-1].lr,
    )


def train(config: TrainConfig, dataset: Optional[DatasetSplit] = None, run_dir: Optional[Path] = None, resume: bool = False) -> RunResult:
    """M epochs over a per-epoch permutation of the training set, then per-domain evaluation."""
    if config.mode is None:
        raise ConfigError("mode", "required to train")
    started = time.perf_counter()
    dataset = dataset if dataset is not None else generate_dataset(config)
    n = len(dataset.train)
    if [s.id for s in dataset.train] != list(range(n)):
        raise DataError("training sample ids must be 0..N-1 in order")

    checkpoint = Path(run_dir) / CHECKPOINT_NAME if run_dir is not None else None
    if resume and checkpoint is not None and checkpoint.exists():
        state = unpack_state(load_checkpoint(checkpoint), _optimizer(config, n))
        log.info("resumed from checkpoint", path=str(checkpoint), epoch=state.epoch)
    else:
        state = fresh_state(config, n)

    log.info("training started", mode=config.mode.value, seed=config.seed, epochs=config.epochs, n_train=n, max_iter=state.opt.max_iter)
    for epoch in range(state.epoch, config.epochs):
        order = stream(config.seed, Purpose.ORDER, epoch).permutation(n)
        first = len(state.metrics)
        for lo in range(0, n, config.batch):
            batch = [dataset.train[j] for j in order[lo:lo + config.batch]]
            state.metrics.extend(train_step(state, batch, config.mode, config, epoch))
        summary = _summarize(epoch, state.metrics[first:])
        state.summaries.append(summary)
        state.epoch = epoch + 1
        log.info(
            "epoch finished",
            epoch=epoch,
            mean_loss=round(summary.mean_loss, 5),
            aug_rate=round(summary.aug_rate, 4),
            gate_rate=round(summary.gate_rate, 4),
            lr=summary.lr,
        )
        if checkpoint is not None and (state.epoch % config.checkpoint_every == 0 or state.epoch == config.epochs):
            save_checkpoint(checkpoint, pack_state(state))

    accuracies = {name: evaluate(state.params, samples) for name, samples in dataset.eval_by_name().items()}
    seconds = time.perf_counter() - started
    log.info("training finished", mode=config.mode.value, seed=config.seed, seconds=round(seconds, 2), **accuracies)
    return RunResult(
        config=config,
        params=state.params,
        bank=state.bank,
        tracker=state.tracker,
        accuracies=accuracies,
        metrics=state.metrics,
        epochs=state.summaries,
        seconds=seconds,
    )
