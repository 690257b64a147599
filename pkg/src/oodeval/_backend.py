"""Kernel backend selection.

Prefers the compiled extension, falling back to the pure-numpy module.
Set OODEVAL_BACKEND=python or =compiled to force one (compiled raises if
the extension was not built).
"""

from __future__ import annotations

import os

_choice = os.environ.get("OODEVAL_BACKEND", "auto")
if _choice not in ("auto", "compiled", "python"):
    raise RuntimeError(f"OODEVAL_BACKEND must be auto, compiled or python, not {_choice!r}")

if _choice == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _kernels_py as _impl

        BACKEND = "python"

best_split2 = _impl.best_split2
lloyd2 = _impl.lloyd2
gmm2_em = _impl.gmm2_em
