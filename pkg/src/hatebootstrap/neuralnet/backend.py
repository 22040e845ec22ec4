"""Kernel backend selection: compiled Cython extension with numpy fallback.

The compiled kernel is preferred when importable. Set
``HATEBOOTSTRAP_BACKEND=numpy`` or ``=cython`` to force one (forcing cython
when the extension is missing raises at import).
"""

from __future__ import annotations

import os

_forced = os.environ.get("HATEBOOTSTRAP_BACKEND", "").strip().lower()

if _forced == "numpy":
    from . import _lstm_np as _impl

    BACKEND = "numpy"
elif _forced == "cython":
    from . import _lstm_cy as _impl  # type: ignore[attr-defined]

    BACKEND = "cython"
elif _forced:
    raise ImportError(f"unknown HATEBOOTSTRAP_BACKEND value: {_forced!r}")
else:
    try:
        from . import _lstm_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _lstm_np as _impl

        BACKEND = "numpy"

forward_batch = _impl.forward_batch
backward_batch = _impl.backward_batch
