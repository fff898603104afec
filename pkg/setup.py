"""Build script: compiles the optional Cython menu-evaluation kernel.

The package works without the extension (a numpy fallback is selected at
import time), so compilation failures are downgraded to warnings.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            warnings.warn(f"skipping compiled kernels ({exc}); "
                          "using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"failed to build {ext.name} ({exc}); "
                          "using pure-Python fallback")


def make_ext_modules():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension
    except ImportError:
        return []
    ext = Extension(
        "contractlab._kernels._core",
        sources=["src/contractlab/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=make_ext_modules(),
    cmdclass={"build_ext": OptionalBuildExt},
)
