import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The CRF dynamic-programming kernels are the training hot loop; they are
# compiled with Cython. toxtag.crf falls back to the numpy implementation
# at import time if the extension is missing, so a failed build only costs
# speed, not functionality.
extensions = [
    Extension(
        "toxtag.crf._kernels",
        ["src/toxtag/crf/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
