"""Build hook for the optional compiled tokenizer kernel.

The package works without the extension (a pure-Python kernel is selected at
import time); the extension only speeds up the hot scanning loop.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("privstmt.javastmt._kernel_cy", ["src/privstmt/javastmt/_kernel_cy.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
