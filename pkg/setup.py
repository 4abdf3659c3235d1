"""Build hook for the optional Cython kernels.

The extension is marked optional: if Cython or a C compiler is missing the
package still installs and ``smartvector.kernels`` falls back to pure Python.
"""
from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "smartvector._speedups",
                ["src/smartvector/_speedups.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
