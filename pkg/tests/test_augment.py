import numpy as np
import pytest
from pydantic import ValidationError

from augment.rgb_shuffle import (
    IDENTITY,
    NON_IDENTITY_PERMUTATIONS,
    AugmentationDecision,
    ChannelPermutation,
    compose,
    inverse,
    jitter,
    maybe_augment,
    rgb_shuffle,
    sample_rng,
)


@pytest.fixture
def image(rng):
    return rng.uniform(size=(4, 4, 3))


def test_identity_is_bit_identical(image):
    assert np.array_equal(rgb_shuffle(image, IDENTITY), image)


def test_cyclic_permutation_has_order_three(image):
    gbr = ChannelPermutation(perm=(1, 2, 0))
    out = rgb_shuffle(rgb_shuffle(rgb_shuffle(image, gbr), gbr), gbr)
    assert np.array_equal(out, image)
    assert not np.array_equal(rgb_shuffle(image, gbr), image)


def test_channel_means_are_permuted(image):
    for p in NON_IDENTITY_PERMUTATIONS:
        before = image.reshape(-1, 3).mean(axis=0)
        after = rgb_shuffle(image, p).reshape(-1, 3).mean(axis=0)
        assert np.allclose(after, before[list(p.perm)], rtol=0, atol=1e-15)


def test_composition_and_inverse_laws(image):
    perms = (IDENTITY, *NON_IDENTITY_PERMUTATIONS)
    for p in perms:
        assert compose(p, inverse(p)).is_identity
        assert np.array_equal(rgb_shuffle(rgb_shuffle(image, p), inverse(p)), image)
        for q in perms:
            assert np.array_equal(rgb_shuffle(rgb_shuffle(image, p), q), rgb_shuffle(image, compose(p, q)))


def test_there_are_five_non_identity_orderings():
    assert len(NON_IDENTITY_PERMUTATIONS) == 5
    assert len({p.perm for p in NON_IDENTITY_PERMUTATIONS}) == 5
    assert not any(p.is_identity for p in NON_IDENTITY_PERMUTATIONS)


def test_non_bijective_permutation_is_rejected():
    with pytest.raises(ValidationError):
        ChannelPermutation(perm=(0, 0, 1))


def test_rgb_shuffle_needs_three_channels():
    with pytest.raises(ValueError):
        rgb_shuffle(np.zeros((4, 4, 2)), NON_IDENTITY_PERMUTATIONS[0])


def test_zero_probability_never_augments(image, rng):
    for _ in range(10_000):
        out, decision = maybe_augment(image, 0.0, rng)
        assert not decision.applied
    assert out is image


def test_unit_probability_always_changes_a_colored_image(image, rng):
    for _ in range(1_000):
        out, decision = maybe_augment(image, 1.0, rng)
        assert decision.applied and not decision.permutation.is_identity
        assert not np.array_equal(out, image)


def test_application_rate_tracks_probability(image, rng):
    applied = sum(maybe_augment(image, 0.3, rng)[1].applied for _ in range(100_000))
    assert abs(applied / 100_000 - 0.3) <= 0.01


def test_probability_outside_unit_interval_is_rejected(image, rng):
    with pytest.raises(ValueError):
        maybe_augment(image, 1.2, rng)


def test_decision_ties_applied_to_permutation():
    with pytest.raises(ValidationError):
        AugmentationDecision(applied=True, permutation=IDENTITY, degree=1.0)
    with pytest.raises(ValidationError):
        AugmentationDecision(applied=False, permutation=NON_IDENTITY_PERMUTATIONS[0], degree=0.0)


def test_sample_streams_are_reproducible(image):
    a = maybe_augment(image, 0.5, sample_rng(0, 3, 17))
    b = maybe_augment(image, 0.5, sample_rng(0, 3, 17))
    assert a[1] == b[1]
    assert np.array_equal(a[0], b[0])


def test_jitter_stays_in_range_and_zero_amplitude_is_a_no_op(image, rng):
    assert jitter(image, 0.0, rng) is image
    out = jitter(image, 0.3, rng)
    assert out.shape == image.shape
    assert out.min() >= 0.0 and out.max() <= 1.0
