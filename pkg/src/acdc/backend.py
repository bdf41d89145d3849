"""Kernel backend selection: compiled extension or numpy fallback.

The compiled Cython kernels and the numpy kernels implement the same
entry points (``fft_inplace``, ``dct2_batch``, ``dct3_batch``) with
identical numerics.  Selection order:

1. ``ACDC_KERNEL_BACKEND=python`` or ``=compiled`` in the environment
   forces one side (``compiled`` raises if the extension is absent).
2. Otherwise the compiled extension is used when importable, else the
   numpy fallback.

Transform plans resolve their backend once at construction, so a plan
keeps using the backend it was built with.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = ("auto", "compiled", "python")


def get_kernels(name="auto"):
    """Return the kernel module for ``name``, honoring the env override."""
    if name == "auto":
        name = os.environ.get("ACDC_KERNEL_BACKEND", "auto")
    if name not in BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}, expected one of {BACKENDS}")
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel extension is not available")
        return _compiled
    return _compiled if _compiled is not None else _kernels_py


def backend_name(kernels):
    return "compiled" if getattr(kernels, "COMPILED", False) else "python"


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names
