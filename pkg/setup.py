import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the pure-Python kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("permclass._ckernels", ["src/permclass/_ckernels.pyx"],
                   include_dirs=[numpy.get_include()])],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
