import os
import struct
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from shared.errors import ConfigError, DataError
from shared.types import CHANNELS, NUM_CLASSES
from synthdata.dataset import DatasetSplit, Sample
from synthdata.palettes import MAX_TARGETS, SOURCE_DOMAIN, source_palette, target_palette

# MDFY dataset file, little-endian (see docs/dataset_format.md):
#   header  magic "MDFY" | version u32 | N u32 | H u16 | W u16 | channels u16 | classes u16
#   records id u32 | label u16 | domain u16 | H*W*channels f32 pixels (row-major, channel last)
MAGIC = b"MDFY"
VERSION = 1
HEADER = struct.Struct("<4sIIHHHH")

TRAIN_FILE = "train.mdfy"
EVAL_FILE = "eval.mdfy"


def _record_dtype(h: int, w: int, channels: int) -> np.dtype:
    return np.dtype([("id", "<u4"), ("label", "<u2"), ("domain", "<u2"), ("pixels", "<f4", (h, w, channels))])


def dump_samples(path: str | Path, samples: Sequence[Sample], num_classes: int = NUM_CLASSES) -> None:
    if not samples:
        raise DataError("refusing to write an empty dataset file")
    h, w, c = samples[0].image.shape
    records = np.empty(len(samples), dtype=_record_dtype(h, w, c))
    for i, s in enumerate(samples):
        if s.image.shape != (h, w, c):
            raise DataError(f"sample {s.id} has shape {s.image.shape}, expected {(h, w, c)}")
        records[i] = (s.id, s.label, s.domain_id, s.image)
    with open(path, "wb") as f:
        f.write(HEADER.pack(MAGIC, VERSION, len(samples), h, w, c, num_classes))
        f.write(records.tobytes())


def load_samples(path: str | Path) -> List[Sample]:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise DataError(f"{path}: truncated header")
    magic, version, n, h, w, c, classes = HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise DataError(f"{path}: unsupported version {version}")
    if c != CHANNELS:
        raise DataError(f"{path}: expected {CHANNELS} channels, found {c}")
    dtype = _record_dtype(h, w, c)
    if len(raw) != HEADER.size + n * dtype.itemsize:
        raise DataError(f"{path}: expected {n} records of {dtype.itemsize} bytes")
    records = np.frombuffer(raw, dtype=dtype, offset=HEADER.size, count=n)
    out = []
    for r in records:
        label = int(r["label"])
        if label >= classes:
            raise DataError(f"{path}: label {label} outside {classes} classes")
        out.append(Sample(id=int(r["id"]), image=r["pixels"].astype(np.float64), label=label, domain_id=int(r["domain"])))
    return out


def dump_dataset(directory: str | Path, split: DatasetSplit) -> Dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    eval_samples = [s for _, samples in sorted(split.eval.items()) for s in samples]
    paths = {"train": directory / TRAIN_FILE, "eval": directory / EVAL_FILE}
    dump_samples(paths["train"], split.train)
    dump_samples(paths["eval"], eval_samples)
    return paths


def load_dataset(directory: str | Path) -> DatasetSplit:
    directory = Path(directory)
    train = load_samples(directory / TRAIN_FILE)
    if {s.domain_id for s in train} != {SOURCE_DOMAIN}:
        raise DataError(f"{directory / TRAIN_FILE}: training split must hold source-domain samples only")
    evals: Dict[int, List[Sample]] = {}
    for s in load_samples(directory / EVAL_FILE):
        evals.setdefault(s.domain_id, []).append(s)
    unknown = sorted(d for d in evals if d > MAX_TARGETS)
    if unknown:
        raise DataError(f"{directory / EVAL_FILE}: unknown domain ids {unknown}")
    domains = {d: (source_palette() if d == SOURCE_DOMAIN else target_palette(d)) for d in evals}
    return DatasetSplit(train=train, eval=evals, domains=domains)


def read_config_file(path: str | Path) -> Dict[str, str]:
    """Flat `key = value` lines; `#` starts a comment, blank lines are skipped."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config", f"file not found: {p}")
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ConfigError(p.name, f"not valid UTF-8 text: {e.reason} at byte {e.start}") from e
    values: Dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"{p.name}:{n}", f"expected key=value, got {s!r}")
        k, v = s.split("=", 1)
        k = k.strip().replace("-", "_")
        if not k:
            raise ConfigError(f"{p.name}:{n}", "empty key")
        values[k] = v.strip()
    return values


def save_checkpoint(path: str | Path, arrays: Dict[str, np.ndarray]) -> None:
    path = Path(path)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as f:
        np.savez(f, **arrays)
    os.replace(tmp, path)


def load_checkpoint(path: str | Path) -> Dict[str, np.ndarray]:
    with np.load(path, allow_pickle=False) as z:
        return {k: z[k] for k in z.files}
