import numpy as np
import numpy.typing as npt

from numerics.network import ParameterSet, backward, cross_entropy, forward

EPSILON = 1e-5
# Keeps the relative error meaningful for near-zero gradient coordinates.
DENOMINATOR_FLOOR = 1e-5


def weighted_batch_loss(params: ParameterSet, batch, labels, sample_weights) -> float:
    """(1/B) * sum_i w_i * loss_i, the objective `backward` differentiates."""
    losses = cross_entropy(forward(params, batch), labels)
    return float(np.sum(np.asarray(sample_weights, dtype=np.float64) * losses) / len(losses))


def max_relative_error(
    params: ParameterSet,
    batch,
    labels,
    sample_weights,
    rng: np.random.Generator,
    n_coords: int = 40,
    eps: float = EPSILON,
) -> float:
    """Largest central-difference relative error over randomly chosen parameter coordinates."""
    analytic = backward(params, batch, labels, sample_weights).ravel()
    flat = params.ravel()
    coords: npt.NDArray[np.int64] = rng.choice(flat.size, size=min(n_coords, flat.size), replace=False)
    worst = 0.0
    for i in coords:
        plus, minus = flat.copy(), flat.copy()
        plus[i] += eps
        minus[i] -= eps
        numeric = (
            weighted_batch_loss(params.with_flat(plus), batch, labels, sample_weights)
            - weighted_batch_loss(params.with_flat(minus), batch, labels, sample_weights)
        ) / (2.0 * eps)
        denom = max(abs(numeric), abs(analytic[i]), DENOMINATOR_FLOOR)
        worst = max(worst, abs(numeric - analytic[i]) / denom)
    return worst
