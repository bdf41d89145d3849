"""SGD with momentum and step schedules, init schemes, losses, datasets.

Diagonal parameters and biases are never weight-decayed; only dense
weight matrices are.  Learning-rate schedule: the base rate is multiplied
by ``lr_decay_factor`` every ``lr_decay_every`` steps, then by each
parameter's own multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .layers import AcdcLayer, AfdfLayer, Cascade, DenseLayer
from .tensor import Rng

__all__ = [
    "SgdConfig",
    "Sgd",
    "sgd_step",
    "InitScheme",
    "apply_init",
    "RegressionDataset",
    "make_regression",
    "mse_loss",
    "complex_mse_loss",
    "softmax_cross_entropy",
    "train",
    "DivergenceError",
]


class DivergenceError(RuntimeError):
    """Raised when training produces a non-finite loss."""

    def __init__(self, step, loss):
        super().__init__(f"non-finite loss {loss} at step {step}")
        self.step = step
        self.loss = loss


@dataclass
class SgdConfig:
    learning_rate: float
    momentum: float = 0.0
    weight_decay: float = 0.0
    lr_decay_factor: float = 1.0
    lr_decay_every: int = 0  # 0 disables the schedule

    def effective_lr(self, step):
        lr = self.learning_rate
        if self.lr_decay_every > 0:
            lr *= self.lr_decay_factor ** (step // self.lr_decay_every)
        return lr


class Sgd:
    """Momentum SGD over a parameter list, with per-parameter decay flags.

    Update per step t:  v <- momentum*v - lr_t*lr_mult*(g + wd*p)
    (wd applied only where the parameter's decay flag is set), then
    p <- p + v.  Gradients are zeroed after the step.
    """

    def __init__(self, params, config):
        self.params = list(params)
        self.config = config
        self.velocities = [np.zeros_like(p.value) for p in self.params]
        self.step_count = 0

    def step(self):
        lr = self.config.effective_lr(self.step_count)
        wd = self.config.weight_decay
        mu = self.config.momentum
        for p, v in zip(self.params, self.velocities):
            g = p.grad
            if wd != 0.0 and p.decay:
                g = g + wd * p.value
            v *= mu
            v -= (lr * p.lr_mult) * g
            p.value += v
            p.grad[...] = 0
        self.step_count += 1


def sgd_step(params, state, config, step):
    """Functional single step; ``state`` maps param index to velocity."""
    lr = config.effective_lr(step)
    for i, p in enumerate(params):
        v = state.setdefault(i, np.zeros_like(p.value))
        g = p.grad
        if config.weight_decay != 0.0 and p.decay:
            g = g + config.weight_decay * p.value
        v *= config.momentum
        v -= (lr * p.lr_mult) * g
        p.value += v
        p.grad[...] = 0


@dataclass
class InitScheme:
    """How diagonals are drawn: around identity or around zero.

    ``diag_identity_noise``: N(1, sigma^2); ``diag_zero_mean``: N(0, sigma^2);
    ``dense_glorot``: leaves diagonals at construction defaults.  Dense
    weights always get a Glorot-style uniform draw, biases start at zero.
    """

    kind: str = "diag_identity_noise"
    sigma: float = 0.1

    KINDS = ("diag_identity_noise", "diag_zero_mean", "dense_glorot")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown init kind {self.kind!r}, expected one of {self.KINDS}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")

    def diag_mean(self):
        return 1.0 if self.kind == "diag_identity_noise" else 0.0


def apply_init(obj, scheme, rng):
    """Initialize every layer of a cascade (or a single layer) in place."""
    layers = obj.layers if isinstance(obj, Cascade) else [obj]
    for layer in layers:
        if isinstance(layer, AcdcLayer):
            if scheme.kind != "dense_glorot":
                mean = scheme.diag_mean()
                layer.a[:] = rng.gaussian(1, layer.n_in, mean, scheme.sigma)[0]
                layer.d[:] = rng.gaussian(1, layer.n_in, mean, scheme.sigma)[0]
            layer.bias_d[:] = 0.0
        elif isinstance(layer, AfdfLayer):
            if scheme.kind != "dense_glorot":
                mean = scheme.diag_mean()
                n = layer.n_in
                if not layer.fix_a:
                    layer.a[:] = (
                        rng.gaussian(1, n, mean, scheme.sigma)
                        + 1j * rng.gaussian(1, n, 0.0, scheme.sigma)
                    )[0]
                layer.d[:] = (
                    rng.gaussian(1, n, mean, scheme.sigma)
                    + 1j * rng.gaussian(1, n, 0.0, scheme.sigma)
                )[0]
        elif isinstance(layer, DenseLayer):
            bound = np.sqrt(6.0 / (layer.n_in + layer.n_out))
            layer.w[...] = rng.uniform(layer.n_in, layer.n_out, -bound, bound)
            layer.b[:] = 0.0


@dataclass
class RegressionDataset:
    """Synthetic linear regression: Y = X @ w_true + noise."""

    x: np.ndarray
    y: np.ndarray
    w_true: np.ndarray
    noise_std: float
    seed: int


def make_regression(seed, n_samples=10000, n_in=32, n_out=32, noise_std=1e-2):
    """Inputs and true operator uniform on [0, 1); Gaussian target noise."""
    if min(n_samples, n_in, n_out) <= 0:
        raise ValueError("dataset dimensions must be positive")
    rng = Rng(seed)
    x = rng.uniform(n_samples, n_in)
    w_true = rng.uniform(n_in, n_out)
    y = x @ w_true + rng.gaussian(n_samples, n_out, 0.0, noise_std)
    return RegressionDataset(x=x, y=y, w_true=w_true, noise_std=noise_std, seed=seed)


def mse_loss(pred, target):
    """Mean over all entries of the squared error, and its gradient."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


def complex_mse_loss(pred, target):
    """Mean squared modulus of the error; gradient is dL/dRe + i*dL/dIm."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff.real**2 + diff.imag**2))
    return loss, 2.0 * diff / diff.size


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch; gradient wrt logits."""
    logits = np.asarray(logits)
    b = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    probs = expd / expd.sum(axis=1, keepdims=True)
    nll = -np.log(probs[np.arange(b), labels] + 1e-300)
    grad = probs.copy()
    grad[np.arange(b), labels] -= 1.0
    return float(nll.mean()), grad / b


def train(
    cascade,
    dataset,
    sgd_config,
    init_scheme=None,
    epochs=50,
    batch_size=128,
    seed=0,
    loss_fn=mse_loss,
):
    """Mini-batch SGD; returns the per-epoch mean training loss curve.

    Deterministic for a given seed: the init draw and every epoch's
    shuffle come from streams spawned off ``seed``.  A non-finite loss
    aborts with :class:`DivergenceError` carrying the step index.
    """
    x, y = (dataset.x, dataset.y) if isinstance(dataset, RegressionDataset) else dataset
    if x.shape[1] != cascade.n_in:
        raise ValueError(f"dataset has {x.shape[1]} features, cascade expects {cascade.n_in}")
    init_rng, shuffle_rng = Rng(seed).spawn(2)
    if init_scheme is not None:
        apply_init(cascade, init_scheme, init_rng)
    optimizer = Sgd(cascade.params(), sgd_config)
    n = x.shape[0]
    curve = []
    step = 0
    for _ in range(epochs):
        order = shuffle_rng.permutation(n)
        total, count = 0.0, 0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            pred = cascade.forward(x[idx])
            loss, grad = loss_fn(pred, y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(step, loss)
            cascade.backward(grad)
            optimizer.step()
            total += loss * len(idx)
            count += len(idx)
            step += 1
        curve.append(total / count)
    return curve
