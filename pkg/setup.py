from setuptools import Extension, setup

# The compiled kernel is an optional accelerator: the package falls back to a
# NumPy/SciPy implementation when the extension is missing, so a failed build
# is never fatal to installation.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "dickeqb._kernels._core",
                ["src/dickeqb/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
