"""Build script: compiles the optional C++ speedup kernels when Cython and a
toolchain are present, and degrades to the pure-Python backend otherwise."""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Never fail the install because the extension would not compile."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping speedup kernels ({exc}); "
                  "anonpipe will use the pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "anonpipe will use the pure-Python backend")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not installed; anonpipe will use the "
              "pure-Python backend")
        return []
    ext = Extension(
        "anonpipe.kernels._speedups",
        sources=["src/anonpipe/kernels/_speedups.pyx"],
        language="c++",
        extra_compile_args=["-O2", "-std=c++11"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
