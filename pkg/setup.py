"""Build hook for the optional compiled kernel.

The package is fully functional without the extension; the pure-Python
kernel in fdconfig._kernels_py is picked up at import time when the
compiled module is absent (or when FDCONFIG_PURE=1 is set).
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/fdconfig/_kernels_cy.pyx",
        compiler_directives={"language_level": 3, "boundscheck": False},
    )
except Exception as exc:  # Cython missing or no C compiler: pure fallback
    print(f"fdconfig: skipping compiled kernel ({exc!r})")

setup(ext_modules=ext_modules)
