"""Numeric hot kernels with a compiled core and a pure-Python fallback.

The compiled extension (`_native`, Cython) implements the adaptive
Gauss-Kronrod evaluation of the density integrals and the batched
log-density assembly in C.  If it is not importable (source checkout
without a compiler), the scipy/numpy fallback is selected instead; both
expose the same functions.

Set BLOCKFADE_KERNELS=python or =native to force a backend.
"""

import os

STATUS_OK = 0
STATUS_DEGENERATE = 1
STATUS_QUADRATURE = 2
STATUS_SIGN = 3

_forced = os.environ.get("BLOCKFADE_KERNELS", "").strip().lower()
if _forced == "python":
    from . import fallback as _impl
elif _forced == "native":
    from . import _native as _impl  # noqa: F401  (ImportError is the answer)
elif _forced == "":
    try:
        from . import _native as _impl
    except ImportError:
        from . import fallback as _impl
else:
    raise ImportError(f"BLOCKFADE_KERNELS must be 'python' or 'native', got {_forced!r}")

BACKEND = _impl.BACKEND
ftilde = _impl.ftilde
ftilde_many = _impl.ftilde_many
neg_log_density_batch = _impl.neg_log_density_batch
