import math

import numpy as np
import pytest
from scipy.stats import kstest

from lossbank.bank import (
    difficulty,
    difficulty_many,
    from_arrays,
    init_bank,
    literal_difficulty,
    to_arrays,
    update,
    update_many,
)
from shared.errors import DivergenceError


def _bank(values, lam=0.9):
    bank = init_bank(len(values), alpha=0.0, lam=lam)
    bank.values[:] = values
    return bank


def test_init_fills_alpha():
    bank = init_bank(4, alpha=1.3863, lam=0.9)
    assert bank.values.tolist() == [1.3863] * 4
    assert not bank.seen.any()
    assert bank.write_count.sum() == 0


def test_init_rejects_empty_bank_and_bad_lambda():
    with pytest.raises(ValueError):
        init_bank(0, alpha=1.0, lam=0.9)
    with pytest.raises(ValueError):
        init_bank(3, alpha=1.0, lam=1.0)


def test_momentum_update():
    bank = init_bank(3, alpha=1.0, lam=0.9)
    update(bank, 1, 2.0)
    assert bank.values[1] == pytest.approx(1.1, abs=1e-15)
    assert bank.values[[0, 2]].tolist() == [1.0, 1.0]
    assert bank.seen.tolist() == [False, True, False]
    assert bank.write_count.tolist() == [0, 1, 0]


def test_zero_lambda_keeps_last_loss():
    bank = init_bank(2, alpha=123.0, lam=0.0)
    update(bank, 0, 7.0)
    assert bank.values[0] == 7.0


def test_random_updates_match_the_formula(rng):
    for _ in range(1000):
        prev, lam, loss = rng.uniform(0, 5), rng.uniform(0, 0.999), rng.uniform(0, 5)
        bank = init_bank(1, alpha=prev, lam=lam)
        update(bank, 0, loss)
        assert abs(bank.values[0] - (lam * prev + (1 - lam) * loss)) <= 1e-12


def test_constant_stream_converges_geometrically():
    alpha, lam, c = math.log(4), 0.9, 0.25
    bank = init_bank(1, alpha=alpha, lam=lam)
    for t in range(1, 101):
        update(bank, 0, c)
        assert abs(abs(bank.values[0] - c) - lam**t * abs(alpha - c)) <= 1e-12


def test_update_errors():
    bank = init_bank(3, alpha=1.0, lam=0.9)
    with pytest.raises(ValueError):
        update(bank, 3, 1.0)
    with pytest.raises(DivergenceError):
        update(bank, 0, float("nan"))
    with pytest.raises(ValueError):
        update_many(bank, [0, 0], [1.0, 2.0])
    with pytest.raises(DivergenceError):
        update_many(bank, [0, 1], [1.0, float("inf")])


def test_update_many_equals_sequential_updates(rng):
    a, b = init_bank(10, alpha=1.0, lam=0.8), init_bank(10, alpha=1.0, lam=0.8)
    ids, losses = rng.permutation(10)[:4], rng.uniform(0, 3, 4)
    update_many(a, ids, losses)
    for i, loss in zip(ids, losses):
        update(b, int(i), float(loss))
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.write_count, b.write_count)


@pytest.mark.parametrize("loss, expected", [(5.0, 1.0), (0.0, 0.0), (2.5, 0.5), (2.0, 0.25)])
def test_difficulty_examples(loss, expected):
    bank = _bank([1.0, 2.0, 3.0, 4.0])
    assert difficulty(bank, loss) == expected
    assert difficulty_many(bank, [loss])[0] == expected


def test_ties_count_as_not_below():
    bank = init_bank(5, alpha=math.log(4), lam=0.9)
    assert difficulty(bank, math.log(4)) == 0.0


def test_difficulty_matches_sort_and_count_oracle(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 300))
        values = np.round(rng.exponential(1.0, n), 2)
        bank = _bank(values)
        queries = np.concatenate([rng.choice(values, 2), rng.uniform(0, 4, 2)])
        ordered = sorted(values.tolist())
        expected = [sum(1 for v in ordered if v < q) / n for q in queries]
        assert difficulty_many(bank, queries).tolist() == expected
        assert [difficulty(bank, float(q)) for q in queries] == expected


def test_difficulty_is_monotone(rng):
    bank = _bank(rng.exponential(1.0, 500))
    pairs = np.sort(rng.uniform(0, 6, (100_000, 2)), axis=1)
    assert np.all(difficulty_many(bank, pairs[:, 0]) <= difficulty_many(bank, pairs[:, 1]))


def test_difficulty_ignores_loss_scale(rng):
    values = rng.exponential(1.0, 200)
    queries = rng.uniform(0, 4, 50)
    assert np.array_equal(difficulty_many(_bank(values), queries), difficulty_many(_bank(values * 7.5), queries * 7.5))


def test_difficulty_of_fresh_draws_is_near_uniform(rng):
    bank = _bank(rng.normal(2.0, 0.5, 2000))
    fresh = rng.normal(2.0, 0.5, 5000)
    assert kstest(difficulty_many(bank, fresh), "uniform").statistic < 0.05


def test_difficulty_is_read_only():
    bank = _bank([1.0, 2.0, 3.0])
    before = to_arrays(bank)
    difficulty(bank, 2.5)
    difficulty_many(bank, [0.5, 9.0])
    after = to_arrays(bank)
    assert all(np.array_equal(before[k], after[k]) for k in before)


def test_literal_difficulty_counts_entries_above():
    bank = _bank([1.0, 2.0, 3.0, 4.0])
    assert literal_difficulty(bank, 2.5) == 0.5
    assert literal_difficulty(bank, 0.0) == 1.0
    assert literal_difficulty(bank, 5.0) == 0.0


def test_non_finite_query_is_rejected():
    bank = _bank([1.0, 2.0])
    with pytest.raises(DivergenceError):
        difficulty(bank, float("inf"))
    with pytest.raises(DivergenceError):
        difficulty_many(bank, [float("nan")])


def test_array_round_trip():
    bank = init_bank(3, alpha=0.7, lam=0.6)
    update(bank, 2, 1.5)
    again = from_arrays(to_arrays(bank))
    assert np.array_equal(again.values, bank.values)
    assert again.lam == 0.6 and again.alpha == 0.7
    assert again.seen.tolist() == [False, False, True]
