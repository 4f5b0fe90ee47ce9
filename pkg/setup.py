"""Build script: compiles the optional Cython kernel for the disorder field.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile must not abort installation.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "polymerlab._kernels._chash",
                ["src/polymerlab/_kernels/_chash.pyx"],
            )
        ],
        language_level=3,
    )
except Exception:
    pass

setup(ext_modules=ext_modules)
