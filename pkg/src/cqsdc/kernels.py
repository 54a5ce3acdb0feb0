"""Backend selection for the statevector kernels.

The compiled extension is used when it has been built; otherwise the numpy
implementation is loaded.  Set ``CQSDC_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("CQSDC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND: str = _impl.BACKEND

apply_1q = _impl.apply_1q
apply_2q = _impl.apply_2q
apply_cnot = _impl.apply_cnot
marginal = _impl.marginal
project = _impl.project
norm2 = _impl.norm2
kron = _impl.kron
sample = _impl.sample

__all__ = [
    "BACKEND",
    "apply_1q",
    "apply_2q",
    "apply_cnot",
    "marginal",
    "project",
    "norm2",
    "kron",
    "sample",
]
