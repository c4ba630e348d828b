import numpy as np
import pytest

from numerics.network import Gradient, ParameterSet
from numerics.optim import OptimizerState, poly_lr, sgd_step
from shared.errors import ShapeError


def _params():
    return ParameterSet([np.full((2, 3), 0.5)], [np.full(3, -0.25)])


def _grad(value):
    return Gradient([np.full((2, 3), value)], [np.full(3, value)])


def _opt(momentum=0.0, weight_decay=0.0, max_iter=10, base_lr=0.1):
    return OptimizerState(base_lr=base_lr, momentum=momentum, weight_decay=weight_decay, power=0.9, max_iter=max_iter)


def test_zero_gradient_leaves_params_unchanged():
    params = _params()
    out = sgd_step(params, _grad(0.0), _opt(momentum=0.9))
    assert np.array_equal(out.weights[0], params.weights[0])
    assert np.array_equal(out.biases[0], params.biases[0])


def test_plain_sgd_step():
    params = _params()
    out = sgd_step(params, _grad(0.2), _opt(), lr=0.1)
    assert out.weights[0] == pytest.approx(params.weights[0] - 0.1 * 0.2)
    assert out.biases[0] == pytest.approx(params.biases[0] - 0.1 * 0.2)


def test_two_momentum_steps_on_constant_gradient():
    params, opt, g, lr = _params(), _opt(momentum=0.9), 0.2, 0.1
    out = sgd_step(sgd_step(params, _grad(g), opt, lr=lr), _grad(g), opt, lr=lr)
    assert out.weights[0] == pytest.approx(params.weights[0] - lr * g * (1 + 1.9), abs=1e-15)


def test_weight_decay_skips_biases():
    params = _params()
    out = sgd_step(params, _grad(0.0), _opt(weight_decay=0.1), lr=1.0)
    assert out.weights[0] == pytest.approx(params.weights[0] * 0.9)
    assert np.array_equal(out.biases[0], params.biases[0])


def test_buffers_live_on_the_optimizer():
    opt = _opt(momentum=0.5)
    sgd_step(_params(), _grad(1.0), opt, lr=0.1)
    assert opt.buffers is not None
    assert np.allclose(opt.buffers.weights[0], 1.0)


def test_sgd_rejects_mismatched_gradient():
    with pytest.raises(ShapeError):
        sgd_step(_params(), Gradient([np.zeros((3, 3))], [np.zeros(3)]), _opt())


def test_poly_lr_endpoints_and_midpoint():
    opt = OptimizerState(base_lr=2.5e-4, momentum=0.9, weight_decay=5e-4, power=0.9, max_iter=1000)
    assert poly_lr(opt) == 2.5e-4
    opt.iter = 500
    assert poly_lr(opt) == pytest.approx(1.3397e-4, rel=1e-4)
    opt.iter = 1000
    assert poly_lr(opt) == 0.0


def test_poly_lr_needs_iterations():
    with pytest.raises(ValueError):
        poly_lr(_opt(max_iter=0))


def test_advance_stops_at_max_iter():
    opt = _opt(max_iter=1)
    opt.advance()
    with pytest.raises(ValueError):
        opt.advance()
