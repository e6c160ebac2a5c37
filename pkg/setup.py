"""Build script for the compiled emulator kernel.

The package works without the extension (a pure-Python twin is selected at
import time), but dataset collection and online evaluation are much faster
with it. Build in place with:

    python setup.py build_ext --inplace
"""
import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("BWELAB_SKIP_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "bwelab.emulator._ckernel",
                [os.path.join("src", "bwelab", "emulator", "_ckernel.pyx")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
