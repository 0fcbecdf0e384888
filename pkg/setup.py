"""Build script for the optional compiled suppression/matching kernels.

The package is fully functional without the extension: spotkit falls back
to pure-NumPy kernels at import time.  The extension only speeds up the
inner loops that dominate large sweep grids.
"""

import os

from setuptools import Extension, setup

extensions = []
if os.environ.get("SPOTKIT_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "spotkit._kernels",
                    ["src/spotkit/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        extensions = []

setup(ext_modules=extensions)
