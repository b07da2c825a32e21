"""Build script for the optional compiled rate kernel.

The package works without the extension (a pure-numpy backend is selected at
import time); building it just makes PSO fitness evaluation several times
faster.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rismimo._ratecore",
                ["src/rismimo/_ratecore.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
