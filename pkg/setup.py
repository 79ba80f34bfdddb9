import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = [
        Extension(
            "torsilab._kernels_cy",
            ["src/torsilab/_kernels_cy.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
        )
    ]
    # The compiled kernels are an accelerator only; the package falls back to
    # the numpy kernels if the build is unavailable.
    for ext in extensions:
        ext.optional = True
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
else:
    ext_modules = []

setup(ext_modules=ext_modules)
