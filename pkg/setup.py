"""Build script for the optional compiled evaluation kernel.

The package is pure Python with a Cython hot-loop kernel.  If Cython or a C
compiler is unavailable the extension is simply skipped and the pure-Python
fallback in ermakov._kernel.evalcore_py is used at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "ermakov._kernel._evalcore",
                ["src/ermakov/_kernel/_evalcore.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
