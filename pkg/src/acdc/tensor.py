"""Dense numeric substrate: matrices, elementwise ops, seeded randomness.

Everything downstream works on plain float64 (or complex128) 2-D numpy
arrays in row-major layout.  This module adds the shape checking the rest
of the library relies on, plus a reproducible counter-based random
generator so experiments can be rerun bit-exactly from a single seed.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Rng",
    "as_matrix",
    "elementwise_mul",
    "matmul",
    "rand_uniform",
    "rand_gaussian",
]


class Rng:
    """Seeded random stream backed by the counter-based Philox generator.

    Equal seeds give bit-identical draws across runs and platforms.
    ``spawn`` derives independent child streams deterministically, which is
    how experiments split one config seed into data / init / shuffle
    streams without coupling them.
    """

    def __init__(self, seed, _seq=None):
        self.seed = seed
        self._seq = np.random.SeedSequence(seed) if _seq is None else _seq
        self._gen = np.random.Generator(np.random.Philox(self._seq))

    def spawn(self, n):
        """Return ``n`` independent child Rngs."""
        return [Rng(self.seed, _seq=s) for s in self._seq.spawn(n)]

    def uniform(self, rows, cols, lo=0.0, hi=1.0):
        if not lo < hi:
            raise ValueError(f"uniform bounds must satisfy lo < hi, got [{lo}, {hi})")
        return self._gen.uniform(lo, hi, size=(rows, cols))

    def gaussian(self, rows, cols, mean=0.0, std=1.0):
        if std < 0:
            raise ValueError(f"std must be nonnegative, got {std}")
        return mean + std * self._gen.standard_normal(size=(rows, cols))

    def permutation(self, n):
        return self._gen.permutation(n)

    def integers(self, lo, hi, size):
        return self._gen.integers(lo, hi, size=size)


def as_matrix(x, name="array"):
    """Coerce to a 2-D C-contiguous array, rejecting anything else."""
    a = np.asarray(x)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    return np.ascontiguousarray(a)


def elementwise_mul(u, v):
    """Entrywise product, allowing a 1xN row to broadcast over a BxN batch."""
    u = as_matrix(u, "u")
    v = as_matrix(v, "v")
    if u.shape != v.shape and not (v.shape == (1, u.shape[1])):
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    return u * v


def matmul(a, b):
    """Dense matrix product; the O(N^2) baseline every oracle leans on."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def rand_uniform(rng, rows, cols, lo=0.0, hi=1.0):
    return rng.uniform(rows, cols, lo, hi)


def rand_gaussian(rng, rows, cols, mean=0.0, std=1.0):
    return rng.gaussian(rows, cols, mean, std)
