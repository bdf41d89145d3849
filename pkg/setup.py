"""Build script for the compiled transform kernels.

The extension is optional at runtime: if acdc._kernels is missing the
package falls back to the vectorized numpy kernels (see acdc.backend).
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "acdc._kernels",
    ["src/acdc/_kernels.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3))
