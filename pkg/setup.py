import os
import sys

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DIVMOMENTS_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        print("Cython/numpy unavailable: installing pure-Python fallback only", file=sys.stderr)
    else:
        omp = [] if sys.platform == "darwin" or os.environ.get("DIVMOMENTS_NO_OPENMP") == "1" else ["-fopenmp"]
        ext = Extension(
            "divmoments._core",
            sources=["src/divmoments/_core.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3"] + omp,
            extra_link_args=omp,
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
