"""Build script: compiles the Cython LSTM kernel when a toolchain is available.

The package works without the extension (a numpy fallback is selected at
import time), so a failed extension build degrades gracefully instead of
blocking installation.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "hatebootstrap.neuralnet._lstm_cy",
                sources=["src/hatebootstrap/neuralnet/_lstm_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # noqa: BLE001 - any build-env problem means "no extension"
    print(f"warning: building without compiled kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
