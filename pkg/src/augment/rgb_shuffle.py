from itertools import permutations
from typing import Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from shared.seeding import Purpose, stream

Image = npt.NDArray[np.float64]


class ChannelPermutation(BaseModel):
    """Output channel c takes input channel perm[c]."""

    model_config = ConfigDict(frozen=True)

    perm: Tuple[int, int, int] = (0, 1, 2)

    @field_validator("perm")
    @classmethod
    def bijection(cls, v: Tuple[int, int, int]):
        if sorted(v) != [0, 1, 2]:
            raise ValueError(f"{v} is not a permutation of (0, 1, 2)")
        return v

    @property
    def is_identity(self) -> bool:
        return self.perm == (0, 1, 2)


IDENTITY = ChannelPermutation()
NON_IDENTITY_PERMUTATIONS: Tuple[ChannelPermutation, ...] = tuple(
    ChannelPermutation(perm=p) for p in permutations(range(3)) if p != (0, 1, 2)
)


def compose(first: ChannelPermutation, second: ChannelPermutation) -> ChannelPermutation:
    """Permutation equal to applying `first` and then `second`."""
    return ChannelPermutation(perm=tuple(first.perm[second.perm[c]] for c in range(3)))


def inverse(p: ChannelPermutation) -> ChannelPermutation:
    inv = [0, 0, 0]
    for c, src in enumerate(p.perm):
        inv[src] = c
    return ChannelPermutation(perm=tuple(inv))


class AugmentationDecision(BaseModel):
    applied: bool
    permutation: ChannelPermutation = IDENTITY
    degree: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def identity_when_skipped(self):
        if not self.applied and not self.permutation.is_identity:
            raise ValueError("an unapplied augmentation must carry the identity permutation")
        if self.applied and self.permutation.is_identity:
            raise ValueError("an applied augmentation must carry a non-identity permutation")
        return self


def rgb_shuffle(image: Image, perm: ChannelPermutation) -> Image:
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"rgb_shuffle needs an H x W x 3 image, got shape {image.shape}")
    if perm.is_identity:
        return image.copy()
    return image[:, :, list(perm.perm)]


def jitter(image: Image, amplitude: float, rng: np.random.Generator) -> Image:
    """Brightness offset in +-amplitude and contrast factor in 1 +- amplitude about the image mean."""
    if amplitude <= 0.0:
        return image
    brightness = rng.uniform(-amplitude, amplitude)
    contrast = rng.uniform(1.0 - amplitude, 1.0 + amplitude)
    mean = image.mean()
    return np.clip((image - mean) * contrast + mean + brightness, 0.0, 1.0)


def maybe_augment(image: Image, p: float, rng: np.random.Generator, jitter_amplitude: float = 0.0) -> Tuple[Image, AugmentationDecision]:
    """With probability p, RGB-shuffle with one of the 5 non-identity permutations.

    Draws are made in a fixed order whatever the outcome, so one stream serves any p.
    When applied and jitter_amplitude > 0, brightness/contrast jitter follows the shuffle.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"augmentation probability must lie in [0, 1], got {p}")
    u = rng.random()
    choice = int(rng.integers(len(NON_IDENTITY_PERMUTATIONS)))
    if u >= p:
        return image, AugmentationDecision(applied=False, degree=p)
    perm = NON_IDENTITY_PERMUTATIONS[choice]
    out = jitter(rgb_shuffle(image, perm), jitter_amplitude, rng)
    return out, AugmentationDecision(applied=True, permutation=perm, degree=p)


def sample_rng(master_seed: int, epoch: int, sample_id: int) -> np.random.Generator:
    """Augmentation stream of one sample in one epoch."""
    return stream(master_seed, Purpose.AUGMENT, epoch, sample_id)
