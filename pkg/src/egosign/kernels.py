"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module is used. Set ``EGOSIGN_PURE_PYTHON=1`` to
force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("EGOSIGN_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

fit_line = _impl.fit_line
nearest_labels = _impl.nearest_labels
lcs_length = _impl.lcs_length
ngram_matches = _impl.ngram_matches
