import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("APOLLONIAN_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "apollonian._walk_ext",
                    ["src/apollonian/_walk_ext.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
