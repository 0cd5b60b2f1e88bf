"""Build script: compiles the optional fast kernels when Cython is available.

The package is fully functional without the extension (a numpy fallback is
selected at import time); see bendlab/_kernels/__init__.py.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "bendlab._kernels._speedups",
                ["src/bendlab/_kernels/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
