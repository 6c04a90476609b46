from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off keeps the compiled kernels bit-identical to the
# pure-Python fallback (no FMA contraction of the float64 reductions).
extensions = [
    Extension(
        "veriscope._hashembed",
        ["src/veriscope/_hashembed.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
