"""Build script for the optional compiled kernel backend.

The package is fully functional without the extension: corrtest._backend
falls back to a vectorized numpy implementation when the compiled module
is absent (e.g. no C compiler or no Cython at build time).
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "corrtest._backend._core",
                ["src/corrtest/_backend/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
