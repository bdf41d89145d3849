"""Vectorized numpy fallback for the transform kernels.

Same entry points and table layout as the compiled extension
(``acdc._kernels``); the backend module picks one of the two at import
time.  The FFT is the iterative radix-2 decimation-in-time algorithm with
a precomputed bit-reversal permutation and a half-circle twiddle table,
vectorized across the batch dimension.
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def fft_inplace(z, rev, tw, inverse):
    """In-place batched radix-2 FFT on a (B, N) complex128 array.

    ``rev`` is the bit-reversal permutation, ``tw`` the forward half-circle
    twiddle table exp(-2i*pi*k/N) for k < N/2.  ``inverse`` conjugates the
    twiddles and applies the 1/N scale.
    """
    b, n = z.shape
    z[:] = z[:, rev]
    m = 2
    while m <= n:
        half = m >> 1
        step = n // m
        w = tw[0 : half * step : step]
        if inverse:
            w = w.conj()
        view = z.reshape(b, n // m, m)
        even = view[:, :, :half].copy()
        t = view[:, :, half:] * w
        view[:, :, :half] = even + t
        view[:, :, half:] = even - t
        m <<= 1
    if inverse:
        z *= 1.0 / n


def dct2_batch(x, out, reorder, rev, tw, w4s):
    """Orthonormal DCT-II of each row of ``x`` via one size-N FFT."""
    v = x[:, reorder].astype(np.complex128)
    fft_inplace(v, rev, tw, False)
    np.multiply(v, w4s, out=v)
    out[:] = v.real


def dct3_batch(y, out, reorder, rev, tw, u1, u2):
    """Orthonormal DCT-III (inverse of dct2_batch) of each row of ``y``."""
    n = y.shape[1]
    v = np.empty(y.shape, dtype=np.complex128)
    v[:, 0] = u1[0] * y[:, 0]
    if n > 1:
        v[:, 1:] = u1[1:] * y[:, 1:] - 1j * (u2[1:] * y[:, :0:-1])
    fft_inplace(v, rev, tw, True)
    out[:, reorder] = v.real
