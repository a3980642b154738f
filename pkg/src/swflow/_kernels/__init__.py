"""Stepping-kernel backend selection.

The compiled extension is preferred when present; the pure NumPy reference
is the fallback.  ``SWFLOW_KERNEL`` forces a choice: set it to ``pure`` or
``compiled`` (the latter raises if the extension is missing, so benchmark
runs cannot silently measure the wrong backend).
"""

from __future__ import annotations

import os

from . import _ref
from .encode import KernelModeSpec, encode_mode

try:
    from . import _compiled
except ImportError:
    _compiled = None

_forced = os.environ.get("SWFLOW_KERNEL", "").strip().lower()
if _forced == "pure":
    _active = _ref
elif _forced == "compiled":
    if _compiled is None:
        raise ImportError(
            "SWFLOW_KERNEL=compiled but the compiled kernel is not built"
        )
    _active = _compiled
elif _forced:
    raise ValueError(f"SWFLOW_KERNEL must be 'pure' or 'compiled', got {_forced!r}")
else:
    _active = _compiled if _compiled is not None else _ref

BACKEND: str = _active.name
prepare = _active.prepare
run_span = _active.run_span


def available_backends() -> dict[str, object]:
    """Importable backend modules by name (for benchmarks and tests)."""
    out = {"pure": _ref}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


__all__ = [
    "BACKEND",
    "KernelModeSpec",
    "available_backends",
    "encode_mode",
    "prepare",
    "run_span",
]
