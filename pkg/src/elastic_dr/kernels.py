"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the numpy
fallback is used. Set ``ELASTIC_DR_PURE_PYTHON=1`` to force the fallback.
Both backends consume random draws identically, so populations are the
same whichever backend produced them.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("ELASTIC_DR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

truncnorm_fill = _impl.truncnorm_fill
respond_into = _impl.respond_into
psi_at = _impl.psi_at
bisect_lambda = _impl.bisect_lambda


def backends() -> dict:
    """All importable backends by name, for benchmarks and equivalence tests."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
