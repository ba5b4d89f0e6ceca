"""Build script: compiles the optional sieve kernel extension.

The package works without the extension (a pure-Python/numpy fallback is
selected at import time), so any build failure here is non-fatal.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "selmerforge._kernels._sieve_c",
        ["src/selmerforge/_kernels/_sieve_c.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)
except Exception as exc:  # pragma: no cover
    print(f"skipping compiled kernel build: {exc}")

setup(ext_modules=ext_modules)
