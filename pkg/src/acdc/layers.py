"""Structured layers with exact backward passes, composed into cascades.

The two structured units share one shape: scale by a diagonal, transform,
scale by a second diagonal (plus bias for the real unit), transform back.

* ``AcdcLayer``: real diagonals around orthonormal DCT-II / DCT-III.
* ``AfdfLayer``: complex diagonals around the FFT pair.

Backward passes are derived analytically and validated against central
finite differences (see acdc.gradcheck).  All gradients accumulate, so a
layer can see several batches before an optimizer step; ``zero_grads``
resets them.

Parameter arrays are fixed storage: initializers and loaders write into
them in place, never rebind them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .transforms import DctPlan, FftPlan, dct, fft, idct, ifft

__all__ = [
    "Param",
    "Layer",
    "AcdcLayer",
    "AfdfLayer",
    "ReluLayer",
    "PermutationLayer",
    "DenseLayer",
    "Cascade",
    "acdc_cascade",
    "afdf_cascade",
    "materialize",
    "affine_offset",
    "optical_presentation",
    "reassemble_optical",
    "count_params",
    "save_cascade",
    "load_cascade",
]

FORMAT_VERSION = 1


@dataclass
class Param:
    """One trainable array plus its gradient accumulator.

    ``decay`` marks the parameter as subject to weight decay (dense
    weights only; diagonals and biases are exempt).  ``lr_mult`` scales
    the step learning rate for this parameter.
    """

    name: str
    value: np.ndarray
    grad: np.ndarray
    decay: bool = False
    lr_mult: float = 1.0


class Layer:
    """Common layer interface: forward, backward, parameter access."""

    linear = True
    complex_domain = False

    n_in: int
    n_out: int

    def forward(self, x):
        raise NotImplementedError

    def backward(self, grad_y, retain_cache=False):
        raise NotImplementedError

    def params(self):
        return []

    def param_count(self):
        return 0

    def zero_grads(self):
        for p in self.params():
            p.grad[...] = 0

    def _check_input(self, x, dtype):
        a = np.asarray(x, dtype=dtype)
        if a.ndim != 2 or a.shape[1] != self.n_in:
            raise ValueError(
                f"{type(self).__name__} expects (batch, {self.n_in}) input, got shape {np.shape(x)}"
            )
        return np.ascontiguousarray(a)

    def _take_cache(self, retain):
        if getattr(self, "_cache", None) is None:
            raise RuntimeError(f"{type(self).__name__}.backward called before forward")
        cache = self._cache
        if not retain:
            self._cache = None
        return cache


class AcdcLayer(Layer):
    """Diagonal, DCT, diagonal-with-bias, inverse DCT.

    With a = d = 1 and zero bias the layer is the identity map, since the
    cosine transform is orthogonal.  Parameter count is 3N.
    """

    def __init__(self, n, dct_mode="fast", backend="auto"):
        self.n_in = self.n_out = n
        self.dct_plan = DctPlan(n, mode=dct_mode, backend=backend)
        self.a = np.ones(n)
        self.d = np.ones(n)
        self.bias_d = np.zeros(n)
        self.grad_a = np.zeros(n)
        self.grad_d = np.zeros(n)
        self.grad_bias_d = np.zeros(n)
        self._params = [
            Param("a", self.a, self.grad_a),
            Param("d", self.d, self.grad_d),
            Param("bias_d", self.bias_d, self.grad_bias_d),
        ]
        self._cache = None

    @property
    def n(self):
        return self.n_in

    def params(self):
        return self._params

    def param_count(self):
        return 3 * self.n_in

    def forward(self, x):
        x = self._check_input(x, np.float64)
        h2 = dct(self.dct_plan, x * self.a)
        y = idct(self.dct_plan, h2 * self.d + self.bias_d)
        self._cache = (x, h2)
        return y

    def backward(self, grad_y, retain_cache=False):
        x, h2 = self._take_cache(retain_cache)
        grad_y = self._check_input(grad_y, np.float64)
        g3 = dct(self.dct_plan, grad_y)
        self.grad_bias_d += g3.sum(axis=0)
        self.grad_d += (h2 * g3).sum(axis=0)
        g1 = idct(self.dct_plan, g3 * self.d)
        self.grad_a += (x * g1).sum(axis=0)
        return g1 * self.a


class AfdfLayer(Layer):
    """Complex diagonals around the FFT pair; no bias term.

    Gradients are taken with respect to the real and imaginary parts of
    each diagonal; the complex grad array stores dL/dRe + i*dL/dIm, so an
    SGD step on the complex array updates both parts at once.

    ``fix_a`` freezes the signal-domain diagonal at 1 (used for the first
    layer of a cascade, where it is redundant with the next layer).
    """

    linear = True
    complex_domain = True

    def __init__(self, n, backend="auto", fix_a=False):
        self.n_in = self.n_out = n
        self.fft_plan = FftPlan(n, backend=backend)
        self.fix_a = fix_a
        self.a = np.ones(n, dtype=np.complex128)
        self.d = np.ones(n, dtype=np.complex128)
        self.grad_a = np.zeros(n, dtype=np.complex128)
        self.grad_d = np.zeros(n, dtype=np.complex128)
        self._params = [
            Param("a", self.a, self.grad_a),
            Param("d", self.d, self.grad_d),
        ]
        self._cache = None

    @property
    def n(self):
        return self.n_in

    def params(self):
        if self.fix_a:
            return self._params[1:]
        return self._params

    def param_count(self):
        return 4 * self.n_in

    def forward(self, x):
        x = self._check_input(x, np.complex128)
        h2 = fft(self.fft_plan, x * self.a)
        y = ifft(self.fft_plan, h2 * self.d)
        self._cache = (x, h2)
        return y

    def backward(self, grad_y, retain_cache=False):
        x, h2 = self._take_cache(retain_cache)
        grad_y = self._check_input(grad_y, np.complex128)
        n = self.n_in
        # adjoint of ifft is fft/N; adjoint of fft is N*ifft
        g3 = fft(self.fft_plan, grad_y) / n
        self.grad_d += (g3 * h2.conj()).sum(axis=0)
        g1 = ifft(self.fft_plan, g3 * self.d.conj()) * n
        self.grad_a += (g1 * x.conj()).sum(axis=0)
        return g1 * self.a.conj()


class ReluLayer(Layer):
    linear = False

    def __init__(self, n):
        self.n_in = self.n_out = n
        self._cache = None

    def forward(self, x):
        x = self._check_input(x, np.float64)
        self._cache = x > 0
        return np.maximum(x, 0.0)

    def backward(self, grad_y, retain_cache=False):
        mask = self._take_cache(retain_cache)
        grad_y = self._check_input(grad_y, np.float64)
        return grad_y * mask


class PermutationLayer(Layer):
    """Fixed (not learned) permutation of the feature axis.

    ``forward(x)[:, j] = x[:, perm[j]]``; backward scatters the gradient
    through the inverse permutation, so forward-then-backward restores
    positions exactly.
    """

    def __init__(self, n, perm=None, rng=None):
        self.n_in = self.n_out = n
        if perm is None:
            if rng is None:
                raise ValueError("PermutationLayer needs an explicit perm or an rng")
            perm = rng.permutation(n)
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(n)):
            raise ValueError("perm is not a bijection on 0..n-1")
        self.perm = perm
        self.inverse_perm = np.argsort(perm)
        self._cache = None

    def forward(self, x):
        if np.asarray(x).shape[1:] != (self.n_in,):
            raise ValueError(f"PermutationLayer expects (batch, {self.n_in}) input")
        self._cache = True
        return np.ascontiguousarray(np.asarray(x)[:, self.perm])

    def backward(self, grad_y, retain_cache=False):
        self._take_cache(retain_cache)
        return np.ascontiguousarray(np.asarray(grad_y)[:, self.inverse_perm])


class DenseLayer(Layer):
    """Ordinary fully connected layer y = xW + b, the baseline."""

    def __init__(self, n_in, n_out, rng=None):
        self.n_in = n_in
        self.n_out = n_out
        if rng is not None:
            bound = np.sqrt(6.0 / (n_in + n_out))
            self.w = rng.uniform(n_in, n_out, -bound, bound)
        else:
            self.w = np.zeros((n_in, n_out))
        self.b = np.zeros(n_out)
        self.grad_w = np.zeros((n_in, n_out))
        self.grad_b = np.zeros(n_out)
        self._params = [
            Param("w", self.w, self.grad_w, decay=True),
            Param("b", self.b, self.grad_b),
        ]
        self._cache = None

    def params(self):
        return self._params

    def param_count(self):
        return self.n_in * self.n_out + self.n_out

    def forward(self, x):
        x = self._check_input(x, np.float64)
        self._cache = x
        return x @ self.w + self.b

    def backward(self, grad_y, retain_cache=False):
        x = self._take_cache(retain_cache)
        grad_y = np.asarray(grad_y, dtype=np.float64)
        if grad_y.shape != (x.shape[0], self.n_out):
            raise ValueError(f"gradient shape {grad_y.shape} does not match output")
        self.grad_w += x.T @ grad_y
        self.grad_b += grad_y.sum(axis=0)
        return grad_y @ self.w.T


class Cascade:
    """Ordered layer stack with a unified forward/backward contract."""

    def __init__(self, layers):
        layers = list(layers)
        if not layers:
            raise ValueError("cascade needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.n_out != nxt.n_in:
                raise ValueError(
                    f"adjacent sizes differ: {type(prev).__name__} outputs {prev.n_out}, "
                    f"{type(nxt).__name__} expects {nxt.n_in}"
                )
        domains = {l.complex_domain for l in layers if not isinstance(l, PermutationLayer)}
        if len(domains) > 1:
            raise ValueError("cannot mix complex and real layers in one cascade")
        self.layers = layers
        self.complex_domain = any(l.complex_domain for l in layers)

    @property
    def n_in(self):
        return self.layers[0].n_in

    @property
    def n_out(self):
        return self.layers[-1].n_out

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad_y, retain_cache=False):
        for layer in reversed(self.layers):
            grad_y = layer.backward(grad_y, retain_cache=retain_cache)
        return grad_y

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def param_count(self):
        return sum(layer.param_count() for layer in self.layers)

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()


def acdc_cascade(n, depth, dct_mode="fast", backend="auto"):
    """A stack of ``depth`` ACDC layers of size ``n`` (identity-configured)."""
    return Cascade([AcdcLayer(n, dct_mode=dct_mode, backend=backend) for _ in range(depth)])


def afdf_cascade(n, depth, backend="auto"):
    """A stack of ``depth`` AFDF layers; the first signal diagonal is fixed
    at identity, which loses no generality (it is absorbed by composition)."""
    return Cascade(
        [AfdfLayer(n, backend=backend, fix_a=(i == 0)) for i in range(depth)]
    )


def _layer_list(obj):
    return list(obj.layers) if isinstance(obj, Cascade) else [obj]


def _bias_arrays(layer):
    if isinstance(layer, AcdcLayer):
        return [layer.bias_d]
    if isinstance(layer, DenseLayer):
        return [layer.b]
    return []


def materialize(obj):
    """Explicit matrix M with forward(x) == x @ M, for linear-only stacks.

    Biases are zeroed while the identity basis is pushed through, then
    restored; a live bias adds the affine offset returned by
    :func:`affine_offset`, reported separately from M.
    """
    layers = _layer_list(obj)
    for layer in layers:
        if not layer.linear:
            raise ValueError(f"cannot materialize a cascade containing {type(layer).__name__}")
    n = layers[0].n_in
    complex_domain = any(l.complex_domain for l in layers)
    basis = np.eye(n, dtype=np.complex128 if complex_domain else np.float64)
    saved = []
    for layer in layers:
        for arr in _bias_arrays(layer):
            saved.append((arr, arr.copy()))
            arr[...] = 0
    try:
        out = basis
        for layer in layers:
            out = layer.forward(out)
    finally:
        for arr, val in saved:
            arr[...] = val
    return out


def affine_offset(obj):
    """Image of the zero vector: the bias contribution of an affine stack."""
    layers = _layer_list(obj)
    n = layers[0].n_in
    complex_domain = any(l.complex_domain for l in layers)
    x = np.zeros((1, n), dtype=np.complex128 if complex_domain else np.float64)
    for layer in layers:
        x = layer.forward(x)
    return x[0]


def optical_presentation(obj):
    """Rewrite an AFDF-only cascade as Fourier-domain diagonal/circulant factors.

    Returns ``(pairs, d_last)`` where pairs is ``[(d_k, R_{k+1})] for
    k = 1..K-1`` with ``R = F^{-1} A F`` circulant, and ``d_last`` is the
    final diagonal.  In the Fourier domain the cascade acts as
    ``prod(diag(d_k) @ R_{k+1}) @ diag(d_last)``.
    """
    layers = _layer_list(obj)
    if not layers or not all(isinstance(l, AfdfLayer) for l in layers):
        raise ValueError("optical presentation requires an AFDF-only cascade")
    first = layers[0]
    if not np.allclose(first.a, 1.0, rtol=0, atol=1e-12):
        raise ValueError("first-layer signal diagonal must be the identity")
    plan = first.fft_plan
    n = first.n_in
    eye = np.eye(n, dtype=np.complex128)
    pairs = []
    for k in range(len(layers) - 1):
        a_next = layers[k + 1].a
        circulant = fft(plan, ifft(plan, eye) * a_next)
        pairs.append((layers[k].d.copy(), circulant))
    return pairs, layers[-1].d.copy()


def reassemble_optical(pairs, d_last, backend="auto"):
    """Rebuild the signal-domain matrix from an optical presentation."""
    n = len(d_last)
    plan = FftPlan(n, backend=backend)
    m = np.eye(n, dtype=np.complex128)
    for d_k, circulant in pairs:
        m = (m * d_k) @ circulant
    m = m * d_last
    return ifft(plan, fft(plan, np.eye(n, dtype=np.complex128)) @ m)


def count_params(obj):
    """Declared parameter count: 3N per ACDC, 4N per AFDF, N*M+M per dense."""
    return obj.param_count()


_LAYER_TAGS = {
    AcdcLayer: "acdc",
    AfdfLayer: "afdf",
    ReluLayer: "relu",
    PermutationLayer: "permutation",
    DenseLayer: "dense",
}


def _layer_spec(layer):
    tag = _LAYER_TAGS[type(layer)]
    if isinstance(layer, AcdcLayer):
        return {
            "type": tag,
            "n": layer.n_in,
            "dct_mode": layer.dct_plan.mode,
            "a": layer.a.tolist(),
            "d": layer.d.tolist(),
            "bias_d": layer.bias_d.tolist(),
        }
    if isinstance(layer, AfdfLayer):
        return {
            "type": tag,
            "n": layer.n_in,
            "fix_a": layer.fix_a,
            "a_re": layer.a.real.tolist(),
            "a_im": layer.a.imag.tolist(),
            "d_re": layer.d.real.tolist(),
            "d_im": layer.d.imag.tolist(),
        }
    if isinstance(layer, ReluLayer):
        return {"type": tag, "n": layer.n_in}
    if isinstance(layer, PermutationLayer):
        return {"type": tag, "n": layer.n_in, "perm": layer.perm.tolist()}
    if isinstance(layer, DenseLayer):
        return {
            "type": tag,
            "n_in": layer.n_in,
            "n_out": layer.n_out,
            "w": layer.w.ravel().tolist(),
            "b": layer.b.tolist(),
        }
    raise TypeError(f"cannot serialize layer {type(layer).__name__}")


def _layer_from_spec(spec, backend):
    tag = spec["type"]
    if tag == "acdc":
        layer = AcdcLayer(spec["n"], dct_mode=spec["dct_mode"], backend=backend)
        layer.a[:] = spec["a"]
        layer.d[:] = spec["d"]
        layer.bias_d[:] = spec["bias_d"]
        return layer
    if tag == "afdf":
        layer = AfdfLayer(spec["n"], backend=backend, fix_a=spec["fix_a"])
        layer.a[:] = np.asarray(spec["a_re"]) + 1j * np.asarray(spec["a_im"])
        layer.d[:] = np.asarray(spec["d_re"]) + 1j * np.asarray(spec["d_im"])
        return layer
    if tag == "relu":
        return ReluLayer(spec["n"])
    if tag == "permutation":
        return PermutationLayer(spec["n"], perm=spec["perm"])
    if tag == "dense":
        layer = DenseLayer(spec["n_in"], spec["n_out"])
        layer.w[...] = np.asarray(spec["w"]).reshape(spec["n_in"], spec["n_out"])
        layer.b[:] = spec["b"]
        return layer
    raise ValueError(f"unknown layer tag {tag!r}")


def save_cascade(cascade, path, seed=None):
    """Write a cascade to a JSON file, value-exact for float64 round-trips."""
    doc = {
        "format_version": FORMAT_VERSION,
        "seed": seed,
        "layers": [_layer_spec(layer) for layer in cascade.layers],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_cascade(path, backend="auto"):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported cascade format version {version!r}")
    return Cascade([_layer_from_spec(s, backend) for s in doc["layers"]])
