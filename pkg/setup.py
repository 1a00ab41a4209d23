"""Build script: compiles the optional _kernels extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile degrades to a pure-Python install
instead of aborting.
"""

import sys

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    try:
        ext_modules = cythonize(
            [
                Extension(
                    "univlab._kernels",
                    ["src/univlab/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover
        print(f"univlab: skipping compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
