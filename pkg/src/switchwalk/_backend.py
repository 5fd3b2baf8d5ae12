"""Kernel backend selection.

The compiled extension ``switchwalk._ckern`` is preferred when importable;
``SWITCHWALK_PURE=1`` forces the NumPy reference lane.  Both expose the same
kernel functions with identical numeric behaviour.
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("SWITCHWALK_PURE") == "1":
    kernels = _pure
else:
    try:
        from . import _ckern as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _pure

BACKEND_NAME: str = kernels.BACKEND_NAME


def available_backends() -> list:
    """Names of the kernel lanes importable in this environment."""
    out = [_pure]
    try:
        from . import _ckern

        out.insert(0, _ckern)
    except ImportError:
        pass
    return [b.BACKEND_NAME for b in out]
