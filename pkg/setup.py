"""Build script: compiles the optional Monte Carlo kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so the extension is marked optional and any
compiler failure degrades gracefully to the pure-Python install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fiberspdc._mc_core",
                ["src/fiberspdc/_mc_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
