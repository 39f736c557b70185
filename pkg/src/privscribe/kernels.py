"""Hot-loop kernels, compiled when available.

The Cython extension ``_kernels_c`` is imported if it was built; otherwise the
numpy/pure-Python implementations in ``_kernels_py`` are used. Set
``PRIVSCRIBE_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("PRIVSCRIBE_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"


def edit_ops(ref, hyp) -> tuple[int, int, int]:
    # both backends take any integer sequence; skipping numpy conversion keeps short calls cheap
    return _impl.edit_ops(ref, hyp)


def count_inversions(seq) -> int:
    return _impl.count_inversions(np.ascontiguousarray(seq, dtype=np.int64))


def linear_assignment(cost) -> np.ndarray:
    return _impl.linear_assignment(np.ascontiguousarray(cost, dtype=np.float64))


def autocorr_peaks(frames, min_lag: int, max_lag: int) -> np.ndarray:
    return _impl.autocorr_peaks(
        np.ascontiguousarray(frames, dtype=np.float64), int(min_lag), int(max_lag)
    )
