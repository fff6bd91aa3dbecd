import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional: fmlab falls back to numpy when the
# extension is missing, so a failed build must not abort the install.
extensions = []
if os.environ.get("FMLAB_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        extensions = cythonize(
            [
                Extension(
                    "fmlab._ckernels",
                    ["src/fmlab/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=extensions)
