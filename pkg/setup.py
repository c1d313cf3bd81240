import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the native kernels when a toolchain is available.

    The package runs on the pure-numpy kernels if compilation fails, so a
    missing compiler must not break installation.
    """

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: skipping native kernel build ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: skipping native kernel build of {ext.name} ({exc})")


extensions = [
    Extension(
        "simrerank.kernels._native",
        ["src/simrerank/kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "nonecheck": False,
            "cdivision": True,
        },
    ),
    cmdclass={"build_ext": optional_build_ext},
)
