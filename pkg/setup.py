import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "elastic_dr._ckernels",
        ["src/elastic_dr/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
