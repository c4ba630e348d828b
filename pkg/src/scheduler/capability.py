import math
from dataclasses import dataclass

from shared.errors import DivergenceError


# Running loss extrema over the whole run; a diagnostic that never feeds scheduling.
@dataclass
class CapabilityTracker:
    loss_min: float = math.inf
    loss_max: float = -math.inf
    count: int = 0


def observe_extrema(tracker: CapabilityTracker, loss: float) -> None:
    if not math.isfinite(loss):
        raise DivergenceError(f"non-finite loss {loss} observed")
    tracker.loss_min = min(tracker.loss_min, loss)
    tracker.loss_max = max(tracker.loss_max, loss)
    tracker.count += 1


def capability(tracker: CapabilityTracker, current_loss: float) -> float:
    """M_c = 1 - (L - L_min) / (L_max - L_min), clipped to [0, 1]; 0.5 while max == min.

    The caller observes `current_loss` first.
    """
    if not math.isfinite(current_loss):
        raise DivergenceError(f"non-finite loss {current_loss} in capability")
    if tracker.count == 0:
        raise ValueError("capability needs at least one observed loss")
    span = tracker.loss_max - tracker.loss_min
    if span <= 0.0:
        return 0.5
    m_c = 1.0 - (current_loss - tracker.loss_min) / span
    return min(1.0, max(0.0, m_c))
