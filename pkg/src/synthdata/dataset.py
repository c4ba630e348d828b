from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import structlog

from shared.errors import DataError
from shared.seeding import Purpose, seed_sequence
from shared.types import NUM_CLASSES, TrainConfig
from synthdata.palettes import SOURCE_DOMAIN, DomainSpec, domain_name, source_palette, target_palette
from synthdata.shapes import render_shape

log = structlog.get_logger(__name__)

TRAIN_SPLIT = 0
EVAL_SPLIT = 1


@dataclass(frozen=True, eq=False)
class Sample:
    id: int
    image: npt.NDArray[np.float64]
    label: int
    domain_id: int


@dataclass
class DatasetSplit:
    train: List[Sample]
    eval: Dict[int, List[Sample]]
    domains: Dict[int, DomainSpec] = field(default_factory=dict)

    def eval_by_name(self) -> Dict[str, List[Sample]]:
        return {domain_name(d): samples for d, samples in sorted(self.eval.items())}

    @property
    def target_ids(self) -> List[int]:
        return sorted(d for d in self.eval if d != SOURCE_DOMAIN)


def render_split(spec: DomainSpec, n: int, seed: int, split: int, first_id: int) -> List[Sample]:
    samples = []
    for i in range(n):
        label = i % NUM_CLASSES
        fg, bg = spec.colors(label)
        image = render_shape(label, fg, bg, seed_sequence(seed, Purpose.DATASET, split, spec.domain_id, i))
        samples.append(Sample(id=first_id + i, image=image, label=label, domain_id=spec.domain_id))
    return samples


def generate_dataset(config: TrainConfig) -> DatasetSplit:
    """Source-domain train split plus one eval split per domain; a pure function of config."""
    for key, n in (("n_train", config.n_train), ("n_eval", config.n_eval)):
        if n % NUM_CLASSES:
            raise DataError(f"{key}={n} is not divisible by the class count {NUM_CLASSES}")
    domains = {SOURCE_DOMAIN: source_palette()}
    for k in range(1, config.k_targets + 1):
        domains[k] = target_palette(k)

    train = render_split(domains[SOURCE_DOMAIN], config.n_train, config.seed, TRAIN_SPLIT, 0)
    evals: Dict[int, List[Sample]] = {}
    for d, spec in domains.items():
        evals[d] = render_split(spec, config.n_eval, config.seed, EVAL_SPLIT, d * config.n_eval)
    log.info("dataset generated", n_train=len(train), n_eval=config.n_eval, domains=len(domains), seed=config.seed)
    return DatasetSplit(train=train, eval=evals, domains=domains)


def stack(samples: Sequence[Sample]) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Flatten to (X[B x H*W*3], labels[B], ids[B])."""
    if not samples:
        raise DataError("cannot stack an empty sample list")
    x = np.stack([s.image.reshape(-1) for s in samples])
    y = np.fromiter((s.label for s in samples), dtype=np.int64, count=len(samples))
    ids = np.fromiter((s.id for s in samples), dtype=np.int64, count=len(samples))
    return x, y, ids


def to_grayscale(samples: Sequence[Sample]) -> List[Sample]:
    """Replace every channel by the channel mean, keeping shape information only."""
    out = []
    for s in samples:
        gray = s.image.mean(axis=2, keepdims=True)
        out.append(Sample(id=s.id, image=np.repeat(gray, 3, axis=2), label=s.label, domain_id=s.domain_id))
    return out


def _mean_colors(samples: Sequence[Sample]) -> npt.NDArray[np.float64]:
    return np.stack([s.image.reshape(-1, 3).mean(axis=0) for s in samples])


def color_centroid_oracle(train: Sequence[Sample], evaluated: Sequence[Sample]) -> float:
    """Accuracy of a nearest-centroid classifier on mean image color; measures the spurious color shortcut."""
    colors, labels = _mean_colors(train), np.array([s.label for s in train])
    centroids = np.stack([colors[labels == c].mean(axis=0) for c in range(NUM_CLASSES)])
    query = _mean_colors(evaluated)
    dist = ((query[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    predicted = dist.argmin(axis=1)
    acc = float(np.mean(predicted == np.array([s.label for s in evaluated])))
    log.debug("color oracle scored", accuracy=acc, n=len(evaluated))
    return acc
