import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # The package runs fine on the pure numpy kernels; the extension is a
    # speedup, not a requirement.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sigdrift._kernels._cykernels",
                ["src/sigdrift/_kernels/_cykernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
