"""Backend selection for the sinusoid-bank kernels.

The compiled extension is used when importable. Set ``NMD_KERNELS`` to
``python`` to force the numpy fallback or ``cython`` to require the
extension.
"""

import os

from . import _kernels_py

_choice = os.environ.get("NMD_KERNELS", "auto").lower()
if _choice not in ("auto", "cython", "python"):
    raise ImportError(f"NMD_KERNELS must be auto, cython or python, not {_choice!r}")

_compiled = None
if _choice != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        if _choice == "cython":
            raise

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

BACKEND = "cython" if _compiled is not None else "python"
_impl = BACKENDS[BACKEND]
bank_forward = _impl.bank_forward
bank_backward = _impl.bank_backward


def get_backend(name: str | None = None):
    """Kernel module for ``name`` (default: the active backend)."""
    name = name or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available") from None
