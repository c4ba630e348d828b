import numpy as np
import pytest

import trainer.loop as loop
from numerics.network import ParameterSet, cross_entropy
from shared.errors import ConfigError, DataError
from shared.types import Mode, TrainConfig
from synthdata.dataset import generate_dataset
from synthdata.palettes import MAX_TARGETS
from trainer.loop import evaluate, fresh_state, train, train_step
from trainer.modes import POLICIES


def _zero_params(config):
    sizes = [config.input_dim, *config.hidden, config.num_classes]
    return ParameterSet([np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])], [np.zeros(b) for b in sizes[1:]])


def _same_params(a, b):
    return np.array_equal(a.ravel(), b.ravel())


def test_every_mode_has_a_policy():
    assert set(POLICIES) == set(Mode)


def test_closed_gates_leave_parameters_untouched():
    # Difficulties are multiples of 1/8 with N = B = 8, never inside (0.98, 0.99).
    config = TrainConfig(mode=Mode.NO_ONLY_NOAUG, n_train=8, n_eval=4, batch=8, k_targets=0, hidden=(8,), t_easy=0.98, t_hard=0.99)
    split = generate_dataset(config)
    state = fresh_state(config, 8)
    before = state.params.copy()
    records = train_step(state, split.train, config.mode, config, epoch=0)
    assert all(r.w == 0.0 for r in records)
    assert _same_params(before, state.params)
    assert state.opt.iter == 1
    assert state.opt.buffers is None


def test_baseline_step_skips_the_difficulty_flow(tiny_config):
    config = tiny_config.model_copy(update={"mode": Mode.BASELINE})
    split = generate_dataset(config)
    state = fresh_state(config, len(split.train))
    records = train_step(state, split.train[:8], Mode.BASELINE, config, epoch=0)
    assert len(records) == 8
    assert all(not r.applied and r.w == 1.0 for r in records)
    assert all(r.loss_da is None and r.d_da is None and r.d_no is None for r in records)
    assert state.bank.write_count.sum() == 0


def test_first_step_on_a_flat_bank_augments_everything():
    uniform_loss = float(cross_entropy(np.zeros((1, 4)), [0])[0])
    config = TrainConfig(mode=Mode.FULL, n_train=8, n_eval=4, batch=4, k_targets=0, hidden=(8,), alpha=uniform_loss)
    split = generate_dataset(config)
    state = fresh_state(config, 8)
    state.params = _zero_params(config)
    records = train_step(state, split.train[:4], Mode.FULL, config, epoch=0)
    for r in records:
        assert r.loss_da == uniform_loss
        assert r.d_da == 0.0
        assert r.degree == 1.0
        assert r.applied


def test_bank_receives_original_image_losses(tiny_config):
    config = tiny_config.model_copy(update={"mode": Mode.SHUFFLE_ALWAYS})
    split = generate_dataset(config)
    state = fresh_state(config, len(split.train))
    alpha = state.bank.alpha
    records = train_step(state, split.train[:8], config.mode, config, epoch=0)
    for r in records:
        assert state.bank.values[r.sample_id] == pytest.approx(config.lam * alpha + (1 - config.lam) * r.loss_da, abs=1e-15)
    assert state.bank.write_count[:8].tolist() == [1] * 8
    assert state.bank.write_count[8:].sum() == 0


def test_bank_is_written_once_per_sample_per_epoch(tiny_config):
    config = tiny_config.model_copy(update={"mode": Mode.FULL, "epochs": 3})
    result = train(config)
    assert result.bank.write_count.tolist() == [3] * config.n_train
    assert result.bank.seen.all()
    assert len(result.metrics) == 3 * config.n_train
    assert [s.epoch for s in result.epochs] == [0, 1, 2]


def test_runs_are_deterministic(tiny_config):
    config = tiny_config.model_copy(update={"mode": Mode.FULL})
    a, b = train(config), train(config)
    assert a.accuracies == b.accuracies
    assert _same_params(a.params, b.params)
    assert a.metrics == b.metrics


def test_zero_epochs_returns_an_untrained_network():
    target_scores = []
    for seed in range(100):
        config = TrainConfig(mode=Mode.FULL, epochs=0, n_train=4, n_eval=40, k_targets=MAX_TARGETS, hidden=(16,), seed=seed)
        result = train(config)
        assert result.metrics == []
        target_scores.append(result.mean_target_accuracy)
    assert set(result.accuracies) == {"source", *(f"target{k}" for k in range(1, MAX_TARGETS + 1))}
    # Output units are exchangeable at initialization, so every domain sits at chance on average.
    assert np.mean(target_scores) == pytest.approx(0.25, abs=0.05)


def test_training_ids_must_index_the_bank(tiny_config):
    split = generate_dataset(tiny_config)
    split.train.reverse()
    with pytest.raises(DataError):
        train(tiny_config.model_copy(update={"mode": Mode.FULL}), dataset=split)


def test_train_requires_a_mode(tiny_config):
    with pytest.raises(ConfigError):
        train(tiny_config)


@pytest.mark.parametrize(
    "gated, ungated",
    [(Mode.NO_ONLY, Mode.SHUFFLE_ALWAYS), (Mode.FULL, Mode.DA_ONLY), (Mode.NO_ONLY_NOAUG, Mode.BASELINE)],
)
def test_open_gate_reduces_to_the_ungated_mode(monkeypatch, tiny_config, gated, ungated):
    monkeypatch.setattr(loop, "no_gate_many", lambda d, th: np.ones(len(d)))
    split = generate_dataset(tiny_config)
    a = train(tiny_config.model_copy(update={"mode": gated}), dataset=split)
    b = train(tiny_config.model_copy(update={"mode": ungated}), dataset=split)
    assert _same_params(a.params, b.params)
    assert a.accuracies == b.accuracies


def test_resume_matches_an_uninterrupted_run(monkeypatch, tmp_path, tiny_config):
    config = tiny_config.model_copy(update={"mode": Mode.FULL, "epochs": 3})
    split = generate_dataset(config)
    straight = train(config, dataset=split)

    real_step = loop.train_step

    def interrupted(state, batch, mode, cfg, epoch):
        if epoch == 2:
            raise RuntimeError("interrupted")
        return real_step(state, batch, mode, cfg, epoch)

    monkeypatch.setattr(loop, "train_step", interrupted)
    with pytest.raises(RuntimeError):
        train(config, dataset=split, run_dir=tmp_path, resume=True)
    monkeypatch.undo()

    resumed = train(config, dataset=split, run_dir=tmp_path, resume=True)
    assert _same_params(straight.params, resumed.params)
    assert straight.metrics == resumed.metrics
    assert np.array_equal(straight.bank.values, resumed.bank.values)
    assert straight.accuracies == resumed.accuracies


def test_evaluate_constant_prediction_scores_chance():
    config = TrainConfig(n_train=8, n_eval=40, k_targets=0)
    split = generate_dataset(config)
    params = ParameterSet([np.zeros((768, 4))], [np.array([1.0, 0.0, 0.0, 0.0])])
    assert evaluate(params, split.eval[0]) == 0.25
    with pytest.raises(ValueError):
        evaluate(params, [])
