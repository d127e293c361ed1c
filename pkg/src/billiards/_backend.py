"""Pick the compiled step kernels when available, else the pure-Python ones.

Set ``BILLIARDS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

kernels = _kernels_py
if os.environ.get("BILLIARDS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as kernels  # noqa: F811
    except ImportError:  # pragma: no cover - depends on the build
        kernels = _kernels_py

BACKEND = kernels.BACKEND


def get_kernels(name=None):
    """Return a kernel module by name (``"cython"``, ``"python"``) or the default."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
