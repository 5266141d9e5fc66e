"""Backend selection for the numerical hot kernels.

The compiled Cython extension is preferred when present; the numpy
implementation is the fallback.  Set GAPSOLVE_BACKEND=python or
GAPSOLVE_BACKEND=compiled to force one (forcing `compiled` raises if the
extension is missing).
"""

import os

_requested = os.environ.get("GAPSOLVE_BACKEND", "").strip().lower()
if _requested not in ("", "auto", "python", "compiled"):
    raise ImportError(
        f"GAPSOLVE_BACKEND={_requested!r} not understood; "
        "use 'python', 'compiled' or leave unset"
    )

if _requested == "python":
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _pykernels as _impl

        BACKEND = "python"

ratio_values = _impl.ratio_values
weighted_sum = _impl.weighted_sum
phi_values = _impl.phi_values
nystrom_apply = _impl.nystrom_apply

__all__ = ["BACKEND", "ratio_values", "weighted_sum", "phi_values", "nystrom_apply"]
