import math
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

IMAGE_SIZE = 16
NUM_CLASSES = 4
CHANNELS = 3


# Training configurations of the ablation table, plus the Strong-DA arm of the loss-curve comparison.
class Mode(str, Enum):
    BASELINE = "baseline"
    SHUFFLE_ALWAYS = "shuffle_always"
    DA_ONLY = "da_only"
    NO_ONLY = "no_only"
    NO_ONLY_NOAUG = "no_only_noaug"
    FULL = "full"
    STRONG_DA = "strong_da"


ABLATION_MODES: Tuple[Mode, ...] = (
    Mode.BASELINE,
    Mode.SHUFFLE_ALWAYS,
    Mode.DA_ONLY,
    Mode.NO_ONLY_NOAUG,
    Mode.NO_ONLY,
    Mode.FULL,
)


# Full description of one experiment. Keys double as config-file keys (snake_case) and CLI flags (--kebab-case).
class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    mode: Optional[Mode] = None
    seed: int = Field(default=0, ge=0)
    epochs: int = Field(default=30, ge=0)
    batch: int = Field(default=32, ge=1)
    lam: float = Field(default=0.9, alias="lambda", ge=0.0, lt=1.0)
    alpha: Optional[float] = None
    t_easy: float = Field(default=0.05, ge=0.0, le=1.0)
    t_hard: float = Field(default=0.95, ge=0.0, le=1.0)
    base_lr: float = Field(default=2.5e-4, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(default=5e-4, ge=0.0)
    poly_power: float = Field(default=0.9, gt=0.0)
    n_train: int = Field(default=2000, ge=1)
    n_eval: int = Field(default=500, ge=1)
    k_targets: int = Field(default=3, ge=0, le=5)
    image_size: int = IMAGE_SIZE
    num_classes: int = NUM_CLASSES
    hidden: Tuple[int, ...] = (64,)
    jitter: bool = False
    jitter_amplitude: float = Field(default=0.3, ge=0.0, le=1.0)
    window: int = Field(default=50, ge=1)
    smooth: int = Field(default=100, ge=1)
    checkpoint_every: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)
    out_dir: Optional[str] = None

    @field_validator("mode", mode="before")
    @classmethod
    def normalize_mode(cls, v):
        if isinstance(v, str):
            return v.strip().lower().replace("-", "_")
        return v

    @field_validator("hidden", mode="before")
    @classmethod
    def split_hidden(cls, v):
        if isinstance(v, str):
            parts = [p.strip() for p in v.split(",") if p.strip()]
            return tuple(int(p) for p in parts)
        if isinstance(v, int):
            return (v,)
        return v

    @field_validator("hidden")
    @classmethod
    def hidden_positive(cls, v: Tuple[int, ...]):
        if any(h < 1 for h in v):
            raise ValueError("hidden sizes must be positive")
        return v

    @field_validator("image_size")
    @classmethod
    def fixed_image_size(cls, v: int):
        if v != IMAGE_SIZE:
            raise ValueError(f"only {IMAGE_SIZE}x{IMAGE_SIZE} images are supported")
        return v

    @field_validator("num_classes")
    @classmethod
    def fixed_class_count(cls, v: int):
        if v != NUM_CLASSES:
            raise ValueError(f"the shape vocabulary has exactly {NUM_CLASSES} classes")
        return v

    @field_validator("alpha")
    @classmethod
    def finite_alpha(cls, v: Optional[float]):
        if v is not None and not math.isfinite(v):
            raise ValueError("alpha must be finite")
        return v

    @field_validator("t_hard")
    @classmethod
    def thresholds_ordered(cls, v: float, info: ValidationInfo):
        t_easy = info.data.get("t_easy")
        if t_easy is not None and not t_easy < v:
            raise ValueError(f"t_easy ({t_easy}) must be below t_hard ({v})")
        return v

    @property
    def effective_alpha(self) -> float:
        # Cross-entropy of a uniform predictor.
        return self.alpha if self.alpha is not None else math.log(self.num_classes)

    @property
    def input_dim(self) -> int:
        return self.image_size * self.image_size * CHANNELS

    @property
    def iters_per_epoch(self) -> int:
        return math.ceil(self.n_train / self.batch)


# One row of the per-sample training log. Fields of a flow a mode skips stay None.
class MetricsRecord(BaseModel):
    iter: int
    epoch: int
    sample_id: int
    loss_da: Optional[float] = None
    loss_no: float
    d_da: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    d_no: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    degree: float = Field(ge=0.0, le=1.0)
    applied: bool
    w: float
    m_c: float = Field(ge=0.0, le=1.0)
    lr: float

    @field_validator("w")
    @classmethod
    def binary_weight(cls, v: float):
        if v not in (0.0, 1.0):
            raise ValueError("gate weight must be 0.0 or 1.0")
        return v


class EpochSummary(BaseModel):
    epoch: int
    mean_loss: float
    aug_rate: float
    gate_rate: float
    lr: float
