"""Build script: compiles the optional solver extension.

The package is pure Python plus one optional Cython extension holding the
simplex inner loops (lmmk.lp._speedups).  If Cython or a C compiler is
unavailable the build falls back to the pure-NumPy twin transparently.

    python setup.py build_ext --inplace   # build the extension in-place
    LMMK_SKIP_EXT=1 pip install -e .      # force a pure-Python install
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


def make_extensions():
    if os.environ.get("LMMK_SKIP_EXT", "") not in ("", "0"):
        return []
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []

    extensions = [
        Extension(
            "lmmk.lp._speedups",
            ["src/lmmk/lp/_speedups.pyx"],
            # -ffp-contract=off keeps multiply+add as two rounded operations so
            # the compiled loops are bit-identical to the pure-NumPy twin.
            extra_compile_args=["-O2", "-ffp-contract=off"],
        )
    ]
    return cythonize(
        extensions,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "nonecheck": False,
            "language_level": "3",
        },
    )


class OptionalBuildExt(build_ext):
    """Build extensions but never fail the install over them."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: extension build skipped ({exc}); using pure-Python solver loops")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not compile {ext.name} ({exc}); using pure-Python solver loops")


setup(ext_modules=make_extensions(), cmdclass={"build_ext": OptionalBuildExt})
