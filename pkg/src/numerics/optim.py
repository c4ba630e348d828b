from dataclasses import dataclass
from typing import Optional

from numerics.network import Gradient, ParameterSet
from shared.errors import ShapeError


@dataclass
class OptimizerState:
    base_lr: float
    momentum: float
    weight_decay: float
    power: float
    max_iter: int
    iter: int = 0
    buffers: Optional[Gradient] = None

    def __post_init__(self):
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.weight_decay < 0.0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.power <= 0.0:
            raise ValueError(f"power must be > 0, got {self.power}")
        if self.max_iter < 0 or not 0 <= self.iter <= self.max_iter:
            raise ValueError(f"iter {self.iter} outside [0, max_iter={self.max_iter}]")

    def advance(self) -> None:
        if self.iter >= self.max_iter:
            raise ValueError(f"optimizer already at max_iter={self.max_iter}")
        self.iter += 1


def poly_lr(opt: OptimizerState) -> float:
    """base_lr * (1 - iter/max_iter) ** power."""
    if opt.max_iter == 0:
        raise ValueError("poly_lr needs max_iter > 0")
    if opt.iter > opt.max_iter:
        raise ValueError(f"iter {opt.iter} beyond max_iter {opt.max_iter}")
    return opt.base_lr * (1.0 - opt.iter / opt.max_iter) ** opt.power


def sgd_step(params: ParameterSet, grad: Gradient, opt: OptimizerState, lr: Optional[float] = None) -> ParameterSet:
    """Classic momentum SGD; weight decay touches weights only.

    buf <- m * buf + (grad + wd * param); param <- param - lr * buf.
    Updates opt.buffers in place and returns new parameters.
    """
    if not params.same_shape(grad):
        raise ShapeError(
            f"gradient shapes {[w.shape for w in grad.weights]} do not match parameters {[w.shape for w in params.weights]}"
        )
    if opt.buffers is None:
        opt.buffers = Gradient.zeros_like(params)
    elif not params.same_shape(opt.buffers):
        raise ShapeError("momentum buffers do not match parameter shapes")
    step = poly_lr(opt) if lr is None else lr
    m, wd = opt.momentum, opt.weight_decay

    new_w, new_b = [], []
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        buf_w = m * opt.buffers.weights[k] + (grad.weights[k] + wd * w)
        buf_b = m * opt.buffers.biases[k] + grad.biases[k]
        opt.buffers.weights[k] = buf_w
        opt.buffers.biases[k] = buf_b
        new_w.append(w - step * buf_w)
        new_b.append(b - step * buf_b)
    return ParameterSet(new_w, new_b)
