from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # no Cython: the package falls back to posopt._kernels_py at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "posopt._kernels",
                ["src/posopt/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
