"""Build hooks for the optional compiled graph kernel.

The package is pure Python plus one small Cython extension
(``edcheck._fastgraph``) holding the acyclicity kernel used by the
enumeration-based checkers.  If Cython or a C toolchain is missing the
build silently skips the extension and the package falls back to
``edcheck._fastgraph_py`` at import time.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    return cythonize(
        [Extension("edcheck._fastgraph", ["src/edcheck/_fastgraph.pyx"])],
        language_level=3,
    )


class optional_build_ext(build_ext):
    """build_ext that downgrades compiler failures to a warning."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any toolchain failure
            print(f"warning: skipping compiled kernel ({exc}); "
                  "pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure-Python fallback will be used")


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
