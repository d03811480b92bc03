"""Pick the compiled kernels when available, else the numpy fallback.

Set ``HGPLIFT_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os

from hgplift import _pykernels as pure

if os.environ.get("HGPLIFT_PURE", "") not in ("", "0"):
    kernels = pure
else:
    try:
        from hgplift import _ckernels as kernels  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        kernels = pure

compiled = None
try:
    from hgplift import _ckernels as compiled  # type: ignore[attr-defined,no-redef]
except ImportError:
    pass

BACKEND: str = kernels.BACKEND
