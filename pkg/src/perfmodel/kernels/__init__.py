"""Hot numeric kernels with two interchangeable backends.

``_numba`` holds loop-style kernels compiled with ``numba.njit``; ``_numpy``
holds vectorized fallbacks. The backend is chosen at import time: set
``PERFMODEL_NUMBA=0`` to force the pure-numpy path (it is also used
automatically when numba is not importable). ``BACKEND`` reports the choice.

Both backends use identical tie-breaking and accumulation order where exact
agreement matters (``best_split``, ``rank_average``); the floating kernels
(``pairwise_sq_dists``, ``kde_density``) agree to ~1e-12 relative.
"""

import os

_env = os.environ.get("PERFMODEL_NUMBA", "1").strip().lower()
_want_numba = _env not in {"0", "false", "no", "off"}

if _want_numba:
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:  # numba missing or failed to initialize
        from . import _numpy as _impl

        BACKEND = "numpy"
else:
    from . import _numpy as _impl

    BACKEND = "numpy"

rank_average = _impl.rank_average
best_split = _impl.best_split
pairwise_sq_dists = _impl.pairwise_sq_dists
kde_density = _impl.kde_density

__all__ = [
    "BACKEND",
    "rank_average",
    "best_split",
    "pairwise_sq_dists",
    "kde_density",
]
