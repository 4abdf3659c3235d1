"""Hot-loop kernels, compiled when available.

The Cython extension ``smartvector._speedups`` is used if it was built;
otherwise the pure-Python versions in ``smartvector._pure`` are used. Set
``SMARTVECTOR_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from smartvector import _pure

if os.environ.get("SMARTVECTOR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from smartvector import _speedups as _impl
    except ImportError:
        _impl = _pure

BACKEND = "cython" if _impl is not _pure else "python"

accumulate_scores = _impl.accumulate_scores
pairwise_cosine = _impl.pairwise_cosine
pairwise_jaccard = _impl.pairwise_jaccard
lcs_matches = _impl.lcs_matches

__all__ = [
    "BACKEND",
    "accumulate_scores",
    "pairwise_cosine",
    "pairwise_jaccard",
    "lcs_matches",
]
