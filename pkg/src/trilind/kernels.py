"""Backend selection for the time-stepping kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback.  ``TRILIND_BACKEND`` (``auto``, ``cython``, ``python``) overrides
the choice at import time.
"""

import importlib
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

BACKENDS = ("cython", "python")


def _load_compiled():
    return importlib.import_module("trilind._kernels")


def get_backend(name: str = "auto"):
    """Return the kernel module for ``name``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return _load_compiled()
    if name == "auto":
        try:
            return _load_compiled()
        except ImportError:
            log.info("compiled kernels unavailable, using numpy fallback")
            return _pykernels
    raise ValueError(f"unknown backend {name!r}; expected auto, cython or python")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        _load_compiled()
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


default = get_backend(os.environ.get("TRILIND_BACKEND", "auto").strip().lower() or "auto")
