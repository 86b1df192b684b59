"""Backend selection for the hot numerical kernels.

The compiled extension (``_kernels``) is used when it was built; otherwise
the numpy fallback in ``_kernels_py`` is used. Setting the environment
variable ``CRYPTOBN_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("CRYPTOBN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"

kmeans_dp = _impl.kmeans_dp
family_counts = _impl.family_counts


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True
