"""Build script for the optional C extension.

The package is pure Python plus one Cython kernel (prodstat._fastkern)
that accelerates the weighted-likelihood inner loop.  The extension is
strictly optional: if Cython or a working C compiler is missing, or the
compile fails for any reason, the install proceeds and the package falls
back to the numpy implementation in prodstat.kernels.

Set PRODSTAT_NO_EXT=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

# -march=native is dropped on retry if the local toolchain rejects it;
# the kernel only auto-vectorizes well with it, but stays correct without.
FLAG_SETS = [
    ["-O3", "-fno-math-errno", "-fno-trapping-math", "-march=native"],
    ["-O3", "-fno-math-errno", "-fno-trapping-math"],
    [],
]


class optional_build_ext(build_ext):
    """Try progressively more conservative compile flags; give up quietly."""

    def build_extension(self, ext):
        for flags in FLAG_SETS:
            ext.extra_compile_args = flags
            try:
                super().build_extension(ext)
                return
            except Exception:
                continue
        print("warning: building prodstat._fastkern failed; "
              "falling back to the numpy kernels")

    def run(self):
        try:
            super().run()
        except Exception:
            print("warning: C extension build unavailable; "
                  "falling back to the numpy kernels")


ext_modules = []
if os.environ.get("PRODSTAT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("prodstat._fastkern", ["src/prodstat/_fastkern.pyx"])],
            language_level=3,
        )
    except ImportError:
        print("warning: Cython not available; skipping the C extension")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
