"""Backend selection for the enumeration kernels.

The compiled extension is used when importable; ``POLYBIF_PURE_PYTHON=1``
forces the pure-Python fallback. Integer matrices whose entries could
overflow int64 in the kernel always go through the Python path.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("POLYBIF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

_INT64_SAFE = 2**62


def _fits_int64(K) -> bool:
    n = len(K)
    bound = max((abs(v) for row in K for v in row), default=0)
    return bound * max(n, 1) < _INT64_SAFE


def enumerate_labels(K, antisync: bool, backend: str | None = None) -> list[tuple[int, ...]]:
    """Enumerate canonical labelings with K-invariant column space.

    ``K`` is an integer matrix (list of lists). ``backend`` may force
    ``"python"`` or ``"cython"``.
    """
    use = backend or BACKEND
    if use == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        if _fits_int64(K):
            arr = np.ascontiguousarray(np.array(K, dtype=np.int64).reshape(len(K), len(K)))
            return _compiled.enumerate_labels(arr, bool(antisync))
    return _kernels_py.enumerate_labels(K, antisync)


def labels_invariant(K, labels, backend: str | None = None) -> bool:
    use = backend or BACKEND
    if use == "cython" and _compiled is not None and _fits_int64(K):
        arr = np.ascontiguousarray(np.array(K, dtype=np.int64).reshape(len(K), len(K)))
        return bool(_compiled.labels_invariant(arr, list(labels)))
    return _kernels_py.labels_invariant(K, labels)
