"""
Acceptance suite behind `verify`.

Fast checks are exact oracles on the building blocks plus a tiny end-to-end
determinism run; the full checks train at desk scale and assert the
directional claims (ablation ordering, flow channel, misfitting ordering).
"""

import filecmp
import math
import tempfile
import time
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel

from augment.rgb_shuffle import IDENTITY, NON_IDENTITY_PERMUTATIONS, compose, inverse, maybe_augment, rgb_shuffle
from experiments.ablation import ABLATION_FILE, SUMMARY_FILE, run_ablation
from experiments.figures import flow_channel_correlation, flow_channel_table, loss_curve_table, terminal_losses
from lossbank.bank import LossBank, difficulty, difficulty_many, init_bank, update
from numerics.gradcheck import max_relative_error
from numerics.network import init_params
from pipeline import run_training
from scheduler.gates import GateThresholds, no_gate, no_gate_many
from shared.types import Mode, TrainConfig
from synthdata.dataset import EVAL_SPLIT, color_centroid_oracle, generate_dataset, render_split
from synthdata.palettes import MAX_TARGETS, reassigned_palette
from trainer.loop import fresh_state, train_step

log = structlog.get_logger(__name__)

SEEDS = (0, 1, 2, 3, 4)
FLOW_MIN_WINDOWS = 60
FLOW_MIN_SPEARMAN = 0.3
CYCLIC_SHIFT = (1, 2, 3, 0)


class CheckResult(BaseModel):
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _bank_from(values: np.ndarray) -> LossBank:
    bank = init_bank(values.size, alpha=0.0, lam=0.9)
    bank.values[:] = values
    return bank


def check_bank_update() -> Tuple[bool, str]:
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(1000):
        prev, lam, loss = rng.uniform(0.0, 5.0), rng.uniform(0.0, 0.999), rng.uniform(0.0, 5.0)
        bank = init_bank(1, alpha=prev, lam=lam)
        update(bank, 0, loss)
        worst = max(worst, abs(bank.values[0] - (lam * prev + (1.0 - lam) * loss)))
    lam, alpha, c = 0.9, math.log(4), 0.3
    bank = init_bank(1, alpha=alpha, lam=lam)
    drift = 0.0
    for t in range(1, 101):
        update(bank, 0, c)
        drift = max(drift, abs(abs(bank.values[0] - c) - lam**t * abs(alpha - c)))
    return worst <= 1e-12 and drift <= 1e-12, f"max update error {worst:.2e}, constant-stream error {drift:.2e}"


def check_difficulty() -> Tuple[bool, str]:
    rng = np.random.default_rng(202)
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(1, 5001))
        values = np.round(rng.exponential(1.0, n), 3)
        bank = _bank_from(values)
        queries = np.concatenate([rng.choice(values, 3), rng.uniform(0.0, 4.0, 3)])
        brute = np.array([np.sum(np.sort(values) < q) / n for q in queries])
        fast = difficulty_many(bank, queries)
        linear = np.array([difficulty(bank, float(q)) for q in queries])
        mismatches += int(np.count_nonzero(brute != fast) + np.count_nonzero(brute != linear))
    bank = _bank_from(rng.exponential(1.0, 2000))
    pairs = np.sort(rng.uniform(0.0, 6.0, (100_000, 2)), axis=1)
    low, high = difficulty_many(bank, pairs[:, 0]), difficulty_many(bank, pairs[:, 1])
    violations = int(np.count_nonzero(low > high))
    return mismatches == 0 and violations == 0, f"{mismatches} oracle mismatches, {violations} monotonicity violations"


def check_gate_grid() -> Tuple[bool, str]:
    th = GateThresholds(t_easy=0.05, t_hard=0.95)
    grid = np.arange(1001) / 1000.0
    expected = ((grid > 0.05) & (grid < 0.95)).astype(float)
    scalar = np.array([no_gate(float(d), th) for d in grid])
    vector = no_gate_many(grid, th)
    ends = no_gate(0.05, th) == 0.0 and no_gate(0.95, th) == 0.0
    ok = bool(np.array_equal(scalar, expected) and np.array_equal(vector, expected) and ends)
    return ok, f"{int(expected.sum())} open of {grid.size} grid points; endpoints closed: {ends}"


def check_gradients() -> Tuple[bool, str]:
    rng = np.random.default_rng(303)
    worst = 0.0
    for sizes in ((12, 5, 4), (20, 16, 8, 4), (768, 16, 4)):
        params = init_params(sizes, rng)
        batch = rng.normal(size=(6, sizes[0]))
        labels = rng.integers(0, sizes[-1], 6)
        weights = np.array([1.0, 0.0, 1.0, 1.0, 0.0, 1.0])
        worst = max(worst, max_relative_error(params, batch, labels, weights, rng, n_coords=40))
    return worst < 1e-4, f"max relative error {worst:.2e} over 120 coordinates, 3 shapes"


def check_augmentation() -> Tuple[bool, str]:
    rng = np.random.default_rng(404)
    image = rng.uniform(size=(2, 2, 3))
    trials, applied, identity_applied = 100_000, 0, 0
    for _ in range(trials):
        _, decision = maybe_augment(image, 0.3, rng)
        if decision.applied:
            applied += 1
            identity_applied += int(decision.permutation.is_identity)
    rate = applied / trials
    perms = (IDENTITY, *NON_IDENTITY_PERMUTATIONS)
    laws = all(
        np.array_equal(rgb_shuffle(rgb_shuffle(image, p), q), rgb_shuffle(image, compose(p, q)))
        and np.array_equal(rgb_shuffle(rgb_shuffle(image, p), inverse(p)), image)
        for p in perms
        for q in perms
    )
    ok = abs(rate - 0.3) <= 0.01 and identity_applied == 0 and laws
    return ok, f"applied rate {rate:.4f}, identity when applied {identity_applied}, group laws hold: {laws}"


def check_color_oracle() -> Tuple[bool, str]:
    config = TrainConfig(seed=0, k_targets=MAX_TARGETS)
    split = generate_dataset(config)
    scores = {name: color_centroid_oracle(split.train, samples) for name, samples in split.eval_by_name().items()}
    shifted = render_split(reassigned_palette(CYCLIC_SHIFT), config.n_eval, config.seed, EVAL_SPLIT, 0)
    scores["cyclic_shift"] = color_centroid_oracle(split.train, shifted)
    targets = [acc for name, acc in scores.items() if name.startswith("target")]
    ok = scores["source"] >= 0.99 and all(acc <= 0.35 for acc in targets) and scores["cyclic_shift"] <= 0.30
    return ok, ", ".join(f"{name}={acc:.3f}" for name, acc in scores.items())


def _tiny_config(root: Path) -> TrainConfig:
    return TrainConfig(epochs=1, batch=8, n_train=16, n_eval=8, k_targets=1, hidden=(8,), out_dir=str(root))


def check_zero_gate_and_determinism() -> Tuple[bool, str]:
    # Bank difficulties are multiples of 1/8 here, so no sample falls inside (0.98, 0.99).
    config = TrainConfig(mode=Mode.NO_ONLY_NOAUG, n_train=8, n_eval=4, batch=8, k_targets=0, hidden=(8,), t_easy=0.98, t_hard=0.99)
    split = generate_dataset(config)
    state = fresh_state(config, len(split.train))
    before = state.params.copy()
    records = train_step(state, split.train, config.mode, config, epoch=0)
    untouched = np.array_equal(before.ravel(), state.params.ravel())
    gates_closed = all(r.w == 0.0 for r in records) and state.opt.iter == 1

    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        for root in (a, b):
            run_ablation(_tiny_config(Path(root)), seeds=[0], root=Path(root), workers=1)
        identical = all(filecmp.cmp(Path(a) / name, Path(b) / name, shallow=False) for name in (ABLATION_FILE, SUMMARY_FILE))
    return untouched and gates_closed and identical, f"params untouched: {untouched}, gates closed: {gates_closed}, CSVs identical: {identical}"


def check_ablation_ordering(config: TrainConfig, root: Path) -> Tuple[bool, str]:
    report = run_ablation(config, SEEDS, root=root)
    if report.failures:
        return False, f"{len(report.failures)} runs aborted"
    base = report.mean_target_accuracy(Mode.BASELINE)
    shuffle = report.mean_target_accuracy(Mode.SHUFFLE_ALWAYS)
    full = report.mean_target_accuracy(Mode.FULL)
    ok = full >= shuffle >= base and full - base >= 0.15 and shuffle - base >= 0.10
    return ok, f"target accuracy baseline={base:.3f} shuffle_always={shuffle:.3f} full={full:.3f}"


def check_flow_channel(config: TrainConfig, root: Path) -> Tuple[bool, str]:
    # Smaller batches give enough iterations for the window count.
    run_config = config.model_copy(update={"mode": Mode.FULL, "seed": 0, "batch": 16})
    result, _ = run_training(run_config, root=root)
    table = flow_channel_table(result.metrics, run_config.window)
    rho = flow_channel_correlation(table)
    ok = len(table) >= FLOW_MIN_WINDOWS and rho > FLOW_MIN_SPEARMAN
    return ok, f"{len(table)} windows, spearman={rho:.3f}"


def check_misfitting(config: TrainConfig, root: Path) -> Tuple[bool, str]:
    terminal = {"loss_no_da": [], "loss_modify": [], "loss_strong_da": []}
    for seed in SEEDS:
        runs = [run_training(config.model_copy(update={"mode": m, "seed": seed}), root=root)[0] for m in (Mode.BASELINE, Mode.FULL, Mode.STRONG_DA)]
        table = loss_curve_table(runs[0].metrics, runs[1].metrics, runs[2].metrics, config.smooth)
        for name, value in terminal_losses(table).items():
            terminal[name].append(value)
    means = {name: float(np.mean(v)) for name, v in terminal.items()}
    ok = means["loss_no_da"] < means["loss_modify"] < means["loss_strong_da"]
    return ok, ", ".join(f"{name}={v:.4f}" for name, v in means.items())


FAST_CHECKS: List[Tuple[int, str, Callable[[], Tuple[bool, str]]]] = [
    (1, "bank update oracle", check_bank_update),
    (2, "difficulty oracle", check_difficulty),
    (3, "gate grid", check_gate_grid),
    (4, "gradient check", check_gradients),
    (5, "augmentation statistics", check_augmentation),
    (6, "color-shortcut construct", check_color_oracle),
    (10, "zero-gate no-op and determinism", check_zero_gate_and_determinism),
]


def _timed(number: int, name: str, fn: Callable[[], Tuple[bool, str]]) -> CheckResult:
    started = time.perf_counter()
    passed, detail = fn()
    result = CheckResult(number=number, name=name, passed=bool(passed), detail=detail, seconds=time.perf_counter() - started)
    log.info("check finished", number=number, name=name, passed=result.passed, detail=detail, seconds=round(result.seconds, 2))
    return result


def run_checks(full: bool = False, profile: Optional[TrainConfig] = None, root: Optional[Path] = None) -> List[CheckResult]:
    results = [_timed(n, name, fn) for n, name, fn in FAST_CHECKS]
    if full:
        if profile is None or root is None:
            raise ValueError("full checks need a training profile and an output root")
        results.append(_timed(7, "ablation ordering", lambda: check_ablation_ordering(profile, root / "ablation")))
        results.append(_timed(8, "flow channel", lambda: check_flow_channel(profile, root / "flow_channel")))
        # Reuses the BASELINE and FULL runs written by the ablation check.
        results.append(_timed(9, "misfitting ordering", lambda: check_misfitting(profile, root / "ablation")))
    return sorted(results, key=lambda r: r.number)
