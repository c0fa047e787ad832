"""Kernel backend selection.

The resampling engines route their per-replicate mean/covariance work
through this module.  At import time the compiled Cython core is picked
when present; otherwise the batched-numpy fallback takes over.  Set
CORRTEST_BACKEND=python or CORRTEST_BACKEND=compiled to force a choice
(forcing "compiled" fails loudly when the extension is missing).
"""

from __future__ import annotations

import os

from . import _fallback

_forced = os.environ.get("CORRTEST_BACKEND", "").strip().lower()

if _forced not in ("", "python", "compiled"):
    raise ImportError(
        f"CORRTEST_BACKEND={_forced!r} not understood; use 'python' or 'compiled'"
    )

if _forced == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise ImportError(
                "CORRTEST_BACKEND=compiled but the corrtest._backend._core "
                "extension is not built; reinstall with a C compiler and Cython"
            ) from None
        _impl = _fallback
        BACKEND = "python"

batch_mean_cov = _impl.batch_mean_cov
wild_mean_cov = _impl.wild_mean_cov


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'python'."""
    return BACKEND
