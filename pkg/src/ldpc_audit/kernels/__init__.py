"""Backend dispatch for the GF(2) hot loops.

Two interchangeable backends exist: jitted kernels (numba) and a pure
numpy fallback.  Selection happens once at import time from the
``LDPC_AUDIT_BACKEND`` environment variable:

* unset or ``auto``: numba when importable, numpy otherwise;
* ``numba``: require the jitted kernels, raise if numba is unavailable;
* ``numpy``: force the fallback.

``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

_requested = os.environ.get("LDPC_AUDIT_BACKEND", "auto").strip().lower() or "auto"
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"LDPC_AUDIT_BACKEND must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import numpy_impl as _impl

    _backend = "numpy"
else:
    try:
        from . import numba_impl as _impl

        _backend = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_impl as _impl

        _backend = "numpy"

gauss_jordan = _impl.gauss_jordan
strip_fixpoint = _impl.strip_fixpoint


def backend_name() -> str:
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return _backend


__all__ = ["gauss_jordan", "strip_fixpoint", "backend_name"]
