"""Kernel backend selection.

The compiled core is used when it was built; otherwise the numpy kernels.
Set ``GENEO_RECON_BACKEND=python`` to force the fallback.
"""

import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

_AVAILABLE = {"python": _kernels_py}
try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    _AVAILABLE["cython"] = _ckernels


def available() -> list[str]:
    return sorted(_AVAILABLE)


def get(name: str | None = None):
    if name is None:
        name = os.environ.get("GENEO_RECON_BACKEND") or ("cython" if _ckernels else "python")
    try:
        return _AVAILABLE[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available()}") from None


kernels = get()
BACKEND = "cython" if kernels is _ckernels else "python"
log.debug("geneo_recon kernels: %s", BACKEND)
