from pathlib import Path

import numpy as np
import pytest

from experiments.acceptance import (
    FAST_CHECKS,
    check_ablation_ordering,
    check_flow_channel,
    check_misfitting,
    run_checks,
)
from experiments.config import parse_config
from shared.types import Mode
from synthdata.dataset import EVAL_SPLIT, DatasetSplit, generate_dataset, render_split, to_grayscale
from synthdata.palettes import ORBIT, DomainSpec, target_palette
from trainer.loop import evaluate, train

PROFILE = Path(__file__).resolve().parents[1] / "config" / "acceptance.conf"


@pytest.mark.parametrize("number, name, check", FAST_CHECKS, ids=[name for _, name, _ in FAST_CHECKS])
def test_fast_check_passes(number, name, check):
    passed, detail = check()
    assert passed, detail


def test_run_checks_orders_results():
    results = run_checks(full=False)
    assert [r.number for r in results] == [1, 2, 3, 4, 5, 6, 10]


def test_full_checks_need_a_profile():
    with pytest.raises(ValueError):
        run_checks(full=True)


@pytest.fixture(scope="module")
def profile():
    return parse_config(PROFILE, require_mode=False)


@pytest.fixture(scope="module")
def verify_root(tmp_path_factory):
    return tmp_path_factory.mktemp("verify")


@pytest.mark.slow
def test_ablation_ordering(profile, verify_root):
    passed, detail = check_ablation_ordering(profile, verify_root / "ablation")
    assert passed, detail


@pytest.mark.slow
def test_flow_channel(profile, verify_root):
    passed, detail = check_flow_channel(profile, verify_root / "flow_channel")
    assert passed, detail


@pytest.mark.slow
def test_misfitting_ordering(profile, verify_root):
    passed, detail = check_misfitting(profile, verify_root / "ablation")
    assert passed, detail


@pytest.mark.slow
def test_baseline_learns_the_color_shortcut(profile):
    result = train(profile.model_copy(update={"mode": Mode.BASELINE}))
    assert result.accuracies["source"] >= 0.95
    assert result.mean_target_accuracy <= 0.45


@pytest.mark.slow
def test_shape_alone_determines_the_label(profile):
    split = generate_dataset(profile)
    gray = DatasetSplit(
        train=to_grayscale(split.train),
        eval={d: to_grayscale(samples) for d, samples in split.eval.items()},
        domains=split.domains,
    )
    result = train(profile.model_copy(update={"mode": Mode.BASELINE}), dataset=gray)
    assert np.mean([result.accuracies[f"target{k}"] for k in gray.target_ids]) >= 0.9


@pytest.mark.slow
def test_always_shuffled_model_ignores_which_novel_color_a_target_wears(profile):
    split = generate_dataset(profile)
    result = train(profile.model_copy(update={"mode": Mode.SHUFFLE_ALWAYS}), dataset=split)
    swapped_colors = {ORBIT[2]: ORBIT[5], ORBIT[5]: ORBIT[2]}
    swapped = DomainSpec(
        domain_id=1,
        name="target1",
        palette={c: (swapped_colors[fg], bg) for c, (fg, bg) in target_palette(1).palette.items()},
    )
    redressed = render_split(swapped, profile.n_eval, profile.seed, EVAL_SPLIT, 0)
    assert evaluate(result.params, redressed) == pytest.approx(result.accuracies["target1"], abs=0.05)
    # Never seeing a class in its own color can only cost accuracy on the source.
    assert result.accuracies["source"] <= result.accuracies["target1"] + 0.02
