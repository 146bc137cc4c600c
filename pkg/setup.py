"""Build script for the optional compiled flow kernels.

The extension is marked optional: if Cython or a C compiler is missing the
install proceeds and the package falls back to the pure-NumPy kernels in
``assignflow._flow_py``.

Build in place for development:
    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "assignflow._flow_cy",
                ["src/assignflow/_flow_cy.pyx"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
