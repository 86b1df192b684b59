import os

import numpy as np
from setuptools import Extension, setup

# The extension is optional: without Cython or a compiler the package falls
# back to cryptobn._kernels_py at import time.
ext_modules = []
if os.environ.get("CRYPTOBN_NO_EXTENSION", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "cryptobn._kernels",
                    ["src/cryptobn/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
