"""
Loss bank: one momentum-smoothed loss per training sample.

Difficulty is the fraction of bank entries strictly below the query loss, so a
higher loss means a harder sample. The literal indicator I(L_i < V_k) counts the
entries above the loss instead; that reading contradicts "hard samples stay
unaugmented", and `literal_difficulty` keeps it available for comparison.
"""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import structlog

from shared.errors import DivergenceError

log = structlog.get_logger(__name__)

Vector = npt.NDArray[np.float64]


@dataclass
class LossBank:
    values: Vector
    lam: float
    alpha: float
    seen: npt.NDArray[np.bool_]
    write_count: npt.NDArray[np.int64]

    @property
    def size(self) -> int:
        return int(self.values.size)


def init_bank(n: int, alpha: float, lam: float) -> LossBank:
    if n < 1:
        raise ValueError(f"loss bank needs at least one slot, got N={n}")
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must lie in [0, 1), got {lam}")
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha}")
    log.debug("loss bank initialized", size=n, alpha=alpha, lam=lam)
    return LossBank(
        values=np.full(n, float(alpha)),
        lam=float(lam),
        alpha=float(alpha),
        seen=np.zeros(n, dtype=bool),
        write_count=np.zeros(n, dtype=np.int64),
    )


def _check_id(bank: LossBank, sample_id: int) -> None:
    if not 0 <= sample_id < bank.size:
        raise ValueError(f"sample id {sample_id} outside the bank [0, {bank.size})")


def update(bank: LossBank, sample_id: int, loss: float) -> None:
    """V_id <- lam * V'_id + (1 - lam) * loss."""
    _check_id(bank, sample_id)
    if not math.isfinite(loss):
        raise DivergenceError(f"non-finite loss {loss} for sample {sample_id}")
    bank.values[sample_id] = bank.lam * bank.values[sample_id] + (1.0 - bank.lam) * loss
    bank.seen[sample_id] = True
    bank.write_count[sample_id] += 1


def update_many(bank: LossBank, ids, losses) -> None:
    ids = np.asarray(ids, dtype=np.int64)
    losses = np.asarray(losses, dtype=np.float64)
    if ids.shape != losses.shape:
        raise ValueError(f"ids {ids.shape} and losses {losses.shape} differ in shape")
    if ids.size and (ids.min() < 0 or ids.max() >= bank.size):
        raise ValueError(f"sample ids outside the bank [0, {bank.size})")
    if np.unique(ids).size != ids.size:
        raise ValueError("duplicate sample ids in one bank update")
    if not np.all(np.isfinite(losses)):
        raise DivergenceError(f"non-finite loss among samples {ids[~np.isfinite(losses)].tolist()}")
    bank.values[ids] = bank.lam * bank.values[ids] + (1.0 - bank.lam) * losses
    bank.seen[ids] = True
    bank.write_count[ids] += 1


def difficulty(bank: LossBank, loss: float) -> float:
    """Fraction of bank entries strictly below `loss`, in [0, 1]. Read-only."""
    if not math.isfinite(loss):
        raise DivergenceError(f"non-finite loss {loss} in difficulty query")
    return int(np.count_nonzero(bank.values < loss)) / bank.size


def difficulty_many(bank: LossBank, losses) -> Vector:
    """Vectorized `difficulty` through a sorted copy of the bank; identical results."""
    losses = np.asarray(losses, dtype=np.float64)
    if not np.all(np.isfinite(losses)):
        raise DivergenceError("non-finite loss in difficulty query")
    ordered = np.sort(bank.values)
    return np.searchsorted(ordered, losses, side="left") / bank.size


def literal_difficulty(bank: LossBank, loss: float) -> float:
    """Fraction of entries strictly above `loss` (the printed indicator direction)."""
    if not math.isfinite(loss):
        raise DivergenceError(f"non-finite loss {loss} in difficulty query")
    return int(np.count_nonzero(loss < bank.values)) / bank.size


def to_arrays(bank: LossBank) -> dict:
    return {
        "bank_values": bank.values.copy(),
        "bank_seen": bank.seen.copy(),
        "bank_write_count": bank.write_count.copy(),
        "bank_lam": np.float64(bank.lam),
        "bank_alpha": np.float64(bank.alpha),
    }


def from_arrays(arrays) -> LossBank:
    return LossBank(
        values=np.asarray(arrays["bank_values"], dtype=np.float64).copy(),
        lam=float(arrays["bank_lam"]),
        alpha=float(arrays["bank_alpha"]),
        seen=np.asarray(arrays["bank_seen"], dtype=bool).copy(),
        write_count=np.asarray(arrays["bank_write_count"], dtype=np.int64).copy(),
    )
