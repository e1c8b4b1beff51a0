"""Build the optional compiled clustering kernel.

The package works without it: ``scholarmob.disambig.kernels`` falls back to
the pure-Python twin when the extension is absent.  Set SCHOLARMOB_PURE=1 to
skip the extension build entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SCHOLARMOB_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "scholarmob.disambig._speedups",
                    ["src/scholarmob/disambig/_speedups.pyx"],
                    optional=True,
                )
            ],
            language_level="3",
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
