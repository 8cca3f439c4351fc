"""Build script: compiles the RK4 kernel extension when Cython is available.

The package works without the extension (a numpy fallback is selected at
import time), so any build failure here degrades to the pure-Python path
instead of breaking the install.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "cavshape._kernel",
                ["src/cavshape/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception:
    extensions = []

setup(ext_modules=extensions)
