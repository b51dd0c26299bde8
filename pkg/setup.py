"""Build script: compiles the optional fast kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure to cythonize or compile downgrades to a
pure-Python install instead of aborting.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "zonefold._kernels._fast",
                ["src/zonefold/_kernels/_fast.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(f"zonefold: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
