import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional: if Cython (or a C compiler) is missing
# the package falls back to the numpy implementations at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gapsolve._core._ckernels",
                ["src/gapsolve/_core/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
