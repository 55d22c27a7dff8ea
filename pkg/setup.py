import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the numpy kernel is used instead
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("TELEGRAPH_KIT_PURE"):
    ext_modules = cythonize(
        [
            Extension(
                "telegraph_kit._kernel",
                ["src/telegraph_kit/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                libraries=["m"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
