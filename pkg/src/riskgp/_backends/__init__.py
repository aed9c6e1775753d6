"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the
pure-Python module is the fallback.  ``RISKGP_BACKEND=python`` or
``RISKGP_BACKEND=compiled`` forces a choice (the latter raises if the
extension is unavailable).
"""

import os

_requested = os.environ.get("RISKGP_BACKEND", "auto").strip().lower()

if _requested in ("", "auto"):
    try:
        from . import _core as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _pycore as kernels  # type: ignore[no-redef]
elif _requested in ("compiled", "ext", "c"):
    from . import _core as kernels  # type: ignore[attr-defined, no-redef]
elif _requested in ("python", "pure"):
    from . import _pycore as kernels  # type: ignore[no-redef]
else:
    raise ImportError(f"unknown RISKGP_BACKEND value: {_requested!r}")

BACKEND = kernels.BACKEND


def load_backend(name):
    """Load a specific backend module by name ('python' or 'compiled')."""
    if name == "python":
        from . import _pycore
        return _pycore
    if name == "compiled":
        from . import _core  # type: ignore[attr-defined]
        return _core
    raise ValueError(f"unknown backend: {name!r}")
