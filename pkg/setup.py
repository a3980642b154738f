"""Build script for the optional compiled stepping kernel.

The package works without the extension (a pure NumPy kernel is selected at
import time), so compilation failures are demoted to a warning rather than
aborting the install.
"""

import sys

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "swflow._kernels._compiled",
                ["src/swflow/_kernels/_compiled.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # Cython or numpy missing: fall back to pure kernel
    print(f"swflow: skipping compiled kernel ({exc})", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
