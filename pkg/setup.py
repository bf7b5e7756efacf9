"""Build script: compiles the optional Cython kernels.

The package works without the compiled extension (a NumPy fallback is
selected at import time), so the extension is marked optional and a
failed build does not abort installation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "armshaper._kernels",
                ["src/armshaper/_kernels.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
