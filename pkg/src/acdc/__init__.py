"""Structured efficient linear layers: diagonals around fast transforms.

The core unit multiplies a signal by a learned diagonal, transforms it,
multiplies by a second learned diagonal in the transform domain, and
transforms back.  The real variant uses the orthonormal DCT, the complex
variant the FFT.  Cascades of these units, interleaved with ReLU and
permutation layers, replace dense matrices at O(N) parameters and
O(N log N) operations.
"""

from .backend import available_backends, get_kernels
from .layers import (
    AcdcLayer,
    AfdfLayer,
    Cascade,
    DenseLayer,
    PermutationLayer,
    ReluLayer,
    acdc_cascade,
    afdf_cascade,
    affine_offset,
    count_params,
    load_cascade,
    materialize,
    optical_presentation,
    reassemble_optical,
    save_cascade,
)
from .tensor import Rng, elementwise_mul, matmul, rand_gaussian, rand_uniform
from .training import (
    DivergenceError,
    InitScheme,
    RegressionDataset,
    Sgd,
    SgdConfig,
    apply_init,
    complex_mse_loss,
    make_regression,
    mse_loss,
    softmax_cross_entropy,
    train,
)
from .transforms import DctPlan, FftPlan, dct, dct_matrix, fast_dct_makhoul, fft, idct, ifft

__version__ = "0.1.0"
