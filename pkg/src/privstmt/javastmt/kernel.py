"""Selects the scanning kernel at import time.

The compiled kernel is used when the extension built; otherwise the
pure-Python twin. Set ``PRIVSTMT_PURE=1`` to force the pure kernel (used by
the equivalence tests and the benchmark).
"""

import os

from . import _kernel_py

WORD = _kernel_py.WORD
STRING = _kernel_py.STRING
CHAR = _kernel_py.CHAR
PUNCT = _kernel_py.PUNCT
LINE_COMMENT = _kernel_py.LINE_COMMENT
BLOCK_COMMENT = _kernel_py.BLOCK_COMMENT
COMMENT_KINDS = (LINE_COMMENT, BLOCK_COMMENT)

if os.environ.get("PRIVSTMT_PURE") == "1":
    _impl = _kernel_py
    KERNEL_IMPL = "python"
else:
    try:
        from . import _kernel_cy as _impl

        KERNEL_IMPL = "cython"
    except ImportError:
        _impl = _kernel_py
        KERNEL_IMPL = "python"

scan = _impl.scan
