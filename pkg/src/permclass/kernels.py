"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``PERMCLASS_PURE_PYTHON=1``
to force the pure-Python fallback.
"""
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

_impl = _pykernels
BACKEND = "python"
if os.environ.get("PERMCLASS_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        log.debug("compiled kernels unavailable, using pure Python")

KIND_LEAF = _pykernels.KIND_LEAF
KIND_STAR = _pykernels.KIND_STAR
KIND_PERM = _pykernels.KIND_PERM

tree_arrays = _impl.tree_arrays
decode_values = _impl.decode_values
gw_sample = _impl.gw_sample
count_inversions = _impl.count_inversions
