"""Backend dispatch for the numeric kernels.

The environment variable ``ALFORGE_BACKEND`` selects the implementation:

* ``numba`` -- JIT-compiled kernels (the default when numba imports cleanly)
* ``numpy`` -- pure-numpy fallback

The selection happens once at import time; ``BACKEND`` records the winner.
"""

from __future__ import annotations

import os

_requested = os.environ.get("ALFORGE_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"ALFORGE_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import numpy_impl as _impl

    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl  # type: ignore[no-redef]

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_impl as _impl  # type: ignore[no-redef]

        BACKEND = "numpy"

pairwise_sqdist = _impl.pairwise_sqdist
assign_nearest = _impl.assign_nearest
centroid_sums = _impl.centroid_sums
softmax_rows = _impl.softmax_rows
contrastive_loss_grad = _impl.contrastive_loss_grad
cross_entropy_rows = _impl.cross_entropy_rows

__all__ = [
    "BACKEND",
    "pairwise_sqdist",
    "assign_nearest",
    "centroid_sums",
    "softmax_rows",
    "contrastive_loss_grad",
    "cross_entropy_rows",
]
