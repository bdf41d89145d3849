"""Central finite-difference verification of analytic gradients.

Every layer's backward pass is checked against (L(t+eps) - L(t-eps)) /
(2 eps) applied to each parameter entry and each input entry, using a
smooth scalar loss.  Complex parameters are perturbed through a float64
view, which walks their real and imaginary parts one at a time; the
analytic complex gradient dL/dRe + i*dL/dIm viewed the same way lines up
entry for entry.
"""

from __future__ import annotations

import numpy as np

from .layers import AcdcLayer, AfdfLayer, Cascade, DenseLayer, PermutationLayer, ReluLayer
from .tensor import Rng

__all__ = ["relative_error", "check_gradients", "run_gradcheck_suite", "DEFAULT_TOLERANCE"]

DEFAULT_TOLERANCE = 1e-5
_ERROR_FLOOR = 1e-3  # denominator floor so exact-zero gradients compare absolutely


def relative_error(analytic, numeric):
    return np.abs(analytic - numeric) / np.maximum(
        _ERROR_FLOOR, np.maximum(np.abs(analytic), np.abs(numeric))
    )


def _loss_and_grad(y, target):
    # mean squared deviation from a fixed random target; for complex y the
    # gradient convention is dL/dRe + i*dL/dIm
    diff = y - target
    if np.iscomplexobj(diff):
        loss = float(np.mean(diff.real**2 + diff.imag**2))
        return loss, 2.0 * diff / diff.size
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


def _real_view(arr):
    return arr.view(np.float64) if np.iscomplexobj(arr) else arr


def check_gradients(obj, x, rng, eps=1e-6):
    """Compare analytic parameter and input gradients with central differences.

    Returns a dict mapping ``"param:<name>"`` and ``"input"`` to the
    maximum relative error observed.
    """
    layers = obj  # Layer and Cascade share the forward/backward protocol
    x = np.array(x, copy=True)
    y0 = layers.forward(x)
    if np.iscomplexobj(y0):
        target = rng.gaussian(*y0.shape) + 1j * rng.gaussian(*y0.shape)
    else:
        target = rng.gaussian(*y0.shape)

    def loss_at():
        loss, _ = _loss_and_grad(layers.forward(x), target)
        return loss

    layers.zero_grads()
    _, grad_y = _loss_and_grad(layers.forward(x), target)
    grad_x = layers.backward(grad_y)

    report = {}
    for i, p in enumerate(layers.params()):
        flat = _real_view(p.value).ravel()
        analytic = _real_view(p.grad).ravel()
        numeric = np.empty_like(analytic)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            up = loss_at()
            flat[j] = orig - eps
            down = loss_at()
            flat[j] = orig
            numeric[j] = (up - down) / (2 * eps)
        report[f"param{i}:{p.name}"] = float(relative_error(analytic, numeric).max())

    flat = _real_view(x).ravel()
    analytic = _real_view(np.ascontiguousarray(grad_x)).ravel()
    numeric = np.empty_like(analytic)
    for j in range(flat.size):
        orig = flat[j]
        flat[j] = orig + eps
        up = loss_at()
        flat[j] = orig - eps
        down = loss_at()
        flat[j] = orig
        numeric[j] = (up - down) / (2 * eps)
    report["input"] = float(relative_error(analytic, numeric).max())
    return report


def _random_acdc(n, rng, dct_mode="fast"):
    layer = AcdcLayer(n, dct_mode=dct_mode)
    layer.a[:] = rng.gaussian(1, n, 1.0, 0.4)[0]
    layer.d[:] = rng.gaussian(1, n, 1.0, 0.4)[0]
    layer.bias_d[:] = rng.gaussian(1, n, 0.0, 0.3)[0]
    return layer

def _random_afdf(n, rng):
    layer = AfdfLayer(n)
    layer.a[:] = (rng.gaussian(1, n, 1.0, 0.3) + 1j * rng.gaussian(1, n, 0.0, 0.3))[0]
    layer.d[:] = (rng.gaussian(1, n, 1.0, 0.3) + 1j * rng.gaussian(1, n, 0.0, 0.3))[0]
    return layer

def _random_dense(n, rng):
    return DenseLayer(n, n, rng=rng)


def run_gradcheck_suite(seed=2024, sizes=(4, 8, 16), configs_per_type=5, batches=(1, 3), eps=1e-6):
    """Finite-difference sweep over every layer type and random configs.

    Returns ``{layer_type: max relative error}`` over all sizes, batch
    shapes, parameters, and inputs.
    """
    root = Rng(seed)
    worst = {}

    def record(kind, report):
        worst[kind] = max(worst.get(kind, 0.0), max(report.values()))

    for n in sizes:
        for c in range(configs_per_type):
            b = batches[c % len(batches)]
            (rng,) = root.spawn(1)
            x = rng.gaussian(b, n)
            record("acdc", check_gradients(_random_acdc(n, rng), x, rng, eps=eps))
            zx = rng.gaussian(b, n) + 1j * rng.gaussian(b, n)
            record("afdf", check_gradients(_random_afdf(n, rng), zx, rng, eps=eps))
            record("dense", check_gradients(_random_dense(n, rng), x, rng, eps=eps))
            record("relu", check_gradients(ReluLayer(n), x + 0.05, rng, eps=eps))
            record(
                "permutation",
                check_gradients(PermutationLayer(n, rng=rng), x, rng, eps=eps),
            )
    return worst
