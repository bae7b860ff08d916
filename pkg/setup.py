import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback only
    cythonize = None


def extensions():
    if cythonize is None or os.environ.get("EXTREMAL_BASES_NO_EXT"):
        return []
    ext = Extension(
        "extremal_bases._kernels",
        ["src/extremal_bases/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions())
