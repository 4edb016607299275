"""Build the optional compiled kernels.

If Cython or a C compiler is unavailable the package installs without the
extension and ``contour_forge.kernels`` falls back to pure Python.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self.warn(f"compiled kernels not built ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self.warn(f"compiled kernels not built ({exc}); using pure-Python fallback")


def extensions():
    if os.environ.get("CONTOUR_FORGE_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "contour_forge._kernels",
        ["src/contour_forge/_kernels.pyx"],
        # bitwise agreement with the Python twin: no FMA contraction and no
        # sin/cos -> sincos fusion (glibc sincos differs in the last bit)
        extra_compile_args=["-O3", "-ffp-contract=off", "-fno-builtin-sin", "-fno-builtin-cos"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
