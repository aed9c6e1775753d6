import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("RISKGP_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "riskgp._backends._core",
                    ["src/riskgp/_backends/_core.pyx"],
                    # fp-contract off: the compiled kernels must round exactly
                    # like the pure-Python reference backend.
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        # No Cython available: install with the pure-Python backend only.
        ext_modules = []

setup(ext_modules=ext_modules)
