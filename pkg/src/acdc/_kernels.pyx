# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled transform kernels: batched radix-2 FFT and DCT-II/III via FFT.

Mirrors acdc._kernels_py exactly; see that module for the table layout.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

COMPILED = True

ctypedef double complex cplx


cdef void _fft_row(cplx* row, Py_ssize_t n, const cnp.int64_t* rev,
                   const cplx* tw, bint inverse) noexcept nogil:
    cdef Py_ssize_t i, j, m, half, step, start
    cdef cplx w, t, u
    for i in range(n):
        j = rev[i]
        if j > i:
            t = row[i]
            row[i] = row[j]
            row[j] = t
    m = 2
    while m <= n:
        half = m >> 1
        step = n // m
        start = 0
        while start < n:
            for j in range(half):
                w = tw[j * step]
                if inverse:
                    w = w.conjugate()
                t = w * row[start + half + j]
                u = row[start + j]
                row[start + j] = u + t
                row[start + half + j] = u - t
            start += m
        m <<= 1
    if inverse:
        for i in range(n):
            row[i] = row[i] / n


def fft_inplace(cplx[:, ::1] z, const cnp.int64_t[::1] rev,
                const cplx[::1] tw, bint inverse):
    """In-place batched radix-2 FFT on a (B, N) complex128 array."""
    cdef Py_ssize_t b, nb = z.shape[0], n = z.shape[1]
    if n == 0:
        return
    with nogil:
        for b in range(nb):
            _fft_row(&z[b, 0], n, &rev[0], &tw[0], inverse)


def dct2_batch(const double[:, ::1] x, double[:, ::1] out,
               const cnp.int64_t[::1] reorder, const cnp.int64_t[::1] rev,
               const cplx[::1] tw, const cplx[::1] w4s):
    """Orthonormal DCT-II of each row of ``x`` via one size-N FFT."""
    cdef Py_ssize_t b, k, nb = x.shape[0], n = x.shape[1]
    buf_arr = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] buf = buf_arr
    with nogil:
        for b in range(nb):
            for k in range(n):
                buf[k] = x[b, reorder[k]]
            _fft_row(&buf[0], n, &rev[0], &tw[0], False)
            for k in range(n):
                out[b, k] = (w4s[k] * buf[k]).real


def dct3_batch(const double[:, ::1] y, double[:, ::1] out,
               const cnp.int64_t[::1] reorder, const cnp.int64_t[::1] rev,
               const cplx[::1] tw, const cplx[::1] u1, const cplx[::1] u2):
    """Orthonormal DCT-III (inverse of dct2_batch) of each row of ``y``."""
    cdef Py_ssize_t b, k, nb = y.shape[0], n = y.shape[1]
    cdef cplx ij = 1j
    buf_arr = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] buf = buf_arr
    with nogil:
        for b in range(nb):
            buf[0] = u1[0] * y[b, 0]
            for k in range(1, n):
                buf[k] = u1[k] * y[b, k] - ij * (u2[k] * y[b, n - k])
            _fft_row(&buf[0], n, &rev[0], &tw[0], True)
            for k in range(n):
                out[b, reorder[k]] = buf[k].real
