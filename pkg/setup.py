"""Build script for the optional compiled Monte Carlo kernel.

The package works without the extension (a vectorized numpy fallback is
selected at import time); set QNDTRADEOFF_NO_EXT=1 to skip compilation.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("QNDTRADEOFF_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "qndtradeoff._mc_cython",
                    ["src/qndtradeoff/_mc_cython.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
