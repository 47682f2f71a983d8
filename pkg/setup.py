import os

import numpy as np
from setuptools import Extension, setup

# BFKLAB_NO_EXT=1 skips the compiled core; the package then runs on its
# pure-Python kernels.
ext_modules = []
if not os.environ.get("BFKLAB_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "bfklab._kernels",
                ["src/bfklab/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
