"""Build script for the optional compiled oracle kernel.

The package works without the extension (a pure-Python kernel is selected at
import time); building it just makes oracle construction much faster.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "improvae._kernels.oracle_cy",
                sources=["src/improvae/_kernels/oracle_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
