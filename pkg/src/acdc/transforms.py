"""Orthonormal DCT-II/III and complex radix-2 FFT with precomputed plans.

Two DCT paths share one contract:

* ``naive``  -- multiplication by the explicit orthonormal cosine matrix,
  defined for every size.  This is the oracle path.
* ``fast``   -- the DCT computed through a single size-N complex FFT
  (even/odd reordering, per-bin twiddle, real part), power-of-two sizes
  only.  Must agree with the naive path to 1e-10.

The DCT-II matrix is ``C[n, k] = sqrt(2/N) * eps_k * cos(pi*(2n+1)k/(2N))``
with ``eps_0 = 1/sqrt(2)`` and ``eps_k = 1`` otherwise, indices running
0..N-1.  C is orthogonal, so the inverse transform is multiplication by
its transpose (DCT-III).

Row convention throughout: transforms act on the last axis of a (B, N)
batch, matching right-multiplication of row vectors by C or F.
"""

from __future__ import annotations

import numpy as np

from .backend import backend_name, get_kernels

__all__ = [
    "DctPlan",
    "FftPlan",
    "dct",
    "idct",
    "fft",
    "ifft",
    "fast_dct_makhoul",
    "dct_matrix",
    "bit_reversal_permutation",
]


def is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


def bit_reversal_permutation(n):
    """Bit-reversed index order for a power-of-two n."""
    bits = int(np.log2(n))
    rev = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        rev[i] = (rev[i >> 1] >> 1) | ((i & 1) << (bits - 1))
    return rev


def dct_matrix(n):
    """The orthonormal DCT-II matrix, rows indexed by n, columns by k."""
    if n <= 0:
        raise ValueError(f"size must be positive, got {n}")
    kk = np.arange(n)
    nn = kk[:, None]
    c = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * nn + 1) * kk / (2.0 * n))
    c[:, 0] /= np.sqrt(2.0)
    return c


def _dct_scales(n):
    s = np.full(n, np.sqrt(2.0 / n))
    s[0] = np.sqrt(1.0 / n)
    return s


class FftPlan:
    """Precomputed bit-reversal and twiddle tables for a power-of-two size.

    Plans are immutable after construction and safe to share across
    threads; each transform call works on its own copy of the data.
    """

    def __init__(self, n, backend="auto"):
        if not is_power_of_two(n):
            raise ValueError(f"FFT size must be a power of two, got {n}")
        self.n = n
        self.kernels = get_kernels(backend)
        self.backend = backend_name(self.kernels)
        self.bitrev = bit_reversal_permutation(n)
        self.twiddle = np.exp(-2j * np.pi * np.arange(max(n // 2, 1)) / n)


class DctPlan:
    """DCT plan in ``naive`` (cosine matrix) or ``fast`` (FFT) mode."""

    MODES = ("naive", "fast")

    def __init__(self, n, mode="fast", backend="auto"):
        if n <= 0:
            raise ValueError(f"size must be positive, got {n}")
        if mode not in self.MODES:
            raise ValueError(f"unknown DCT mode {mode!r}, expected one of {self.MODES}")
        if mode == "fast" and not is_power_of_two(n):
            raise ValueError(f"fast DCT requires a power-of-two size, got {n}")
        self.n = n
        self.mode = mode
        if mode == "naive":
            self.cos_matrix = dct_matrix(n)
            self.backend = "naive"
        else:
            self.kernels = get_kernels(backend)
            self.backend = backend_name(self.kernels)
            self.bitrev = bit_reversal_permutation(n)
            self.twiddle = np.exp(-2j * np.pi * np.arange(max(n // 2, 1)) / n)
            # even indices ascending, then odd indices descending
            reorder = np.empty(n, dtype=np.int64)
            top = (n + 1) // 2
            reorder[:top] = 2 * np.arange(top)
            reorder[top:] = 2 * (n - 1 - np.arange(top, n)) + 1
            self.reorder = reorder
            s = _dct_scales(n)
            k = np.arange(n)
            phase = np.pi * k / (2.0 * n)
            self.w4s = s * np.exp(-1j * phase)
            self.u1 = np.exp(1j * phase) / s
            u2 = np.zeros(n, dtype=np.complex128)
            if n > 1:
                u2[1:] = np.exp(1j * phase[1:]) * np.sqrt(n / 2.0)
            self.u2 = u2


def _as_batch(x, n, dtype):
    a = np.asarray(x, dtype=dtype)
    squeeze = a.ndim == 1
    if squeeze:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"expected 1-D or 2-D input, got shape {a.shape}")
    if a.shape[1] != n:
        raise ValueError(f"input has {a.shape[1]} columns, plan expects {n}")
    return np.ascontiguousarray(a), squeeze


def dct(plan, x):
    """Row-wise orthonormal DCT-II."""
    a, squeeze = _as_batch(x, plan.n, np.float64)
    if plan.mode == "naive":
        out = a @ plan.cos_matrix
    else:
        out = np.empty_like(a)
        plan.kernels.dct2_batch(a, out, plan.reorder, plan.bitrev, plan.twiddle, plan.w4s)
    return out[0] if squeeze else out


def idct(plan, x):
    """Row-wise orthonormal DCT-III, the inverse of :func:`dct`."""
    a, squeeze = _as_batch(x, plan.n, np.float64)
    if plan.mode == "naive":
        out = a @ plan.cos_matrix.T
    else:
        out = np.empty_like(a)
        plan.kernels.dct3_batch(a, out, plan.reorder, plan.bitrev, plan.twiddle, plan.u1, plan.u2)
    return out[0] if squeeze else out


def fast_dct_makhoul(plan, x):
    """DCT-II through a single size-N FFT; requires a fast-mode plan."""
    if plan.mode != "fast":
        raise ValueError("fast_dct_makhoul requires a fast-mode DctPlan")
    return dct(plan, x)


def fft(plan, z):
    """Unnormalized forward DFT of each row (complex input and output)."""
    a, squeeze = _as_batch(z, plan.n, np.complex128)
    out = a.copy()
    plan.kernels.fft_inplace(out, plan.bitrev, plan.twiddle, False)
    return out[0] if squeeze else out


def ifft(plan, z):
    """Inverse DFT of each row, scaled by 1/N."""
    a, squeeze = _as_batch(z, plan.n, np.complex128)
    out = a.copy()
    plan.kernels.fft_inplace(out, plan.bitrev, plan.twiddle, True)
    return out[0] if squeeze else out
