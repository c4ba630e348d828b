import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from shared.types import TrainConfig


class GateThresholds(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_easy: float = Field(default=0.05, ge=0.0, le=1.0)
    t_hard: float = Field(default=0.95, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def ordered(self):
        if not self.t_easy < self.t_hard:
            raise ValueError(f"t_easy ({self.t_easy}) must be below t_hard ({self.t_hard})")
        return self

    @classmethod
    def from_config(cls, config: TrainConfig) -> "GateThresholds":
        return cls(t_easy=config.t_easy, t_hard=config.t_hard)


def da_degree(d_da: float) -> float:
    """Augmentation probability 1 - d: easy samples get augmented, hard ones pass unchanged."""
    if not 0.0 <= d_da <= 1.0:
        raise ValueError(f"difficulty must lie in [0, 1], got {d_da}")
    return 1.0 - d_da


def no_gate(d_no: float, th: GateThresholds) -> float:
    """1.0 strictly inside (t_easy, t_hard); 0.0 elsewhere, including both endpoints."""
    return 1.0 if th.t_easy < d_no < th.t_hard else 0.0


def no_gate_many(d_no, th: GateThresholds) -> npt.NDArray[np.float64]:
    d = np.asarray(d_no, dtype=np.float64)
    return ((d > th.t_easy) & (d < th.t_hard)).astype(np.float64)


def gated_mean_loss(losses, weights) -> float:
    """Mean loss over the samples the gate keeps; the plain mean when it keeps none."""
    losses = np.asarray(losses, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    kept = weights.sum()
    if kept <= 0.0:
        return float(losses.mean())
    return float((weights * losses).sum() / kept)
