"""Hot numerical kernels with backend selection at import time.

The compiled Cython extension (``priorfit.kernels._core``) is preferred
when it has been built; otherwise the numpy reference implementations are
used. Set ``PRIORFIT_PURE_PYTHON=1`` to force the reference backend (used
by the benchmark to compare the two).

Dense matrix products are deliberately not kerneled: numpy's BLAS is the
right tool for those in either backend.
"""

import os

from . import reference

if os.environ.get("PRIORFIT_PURE_PYTHON") == "1":
    _impl = reference
    BACKEND = "reference"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = reference
        BACKEND = "reference"

relu = _impl.relu
relu_grad = _impl.relu_grad
softmax_rows = _impl.softmax_rows
softmax_grad_rows = _impl.softmax_grad_rows
sorted_pairwise_l1 = _impl.sorted_pairwise_l1
adam_update = _impl.adam_update
l2_normalize_rows = _impl.l2_normalize_rows

__all__ = [
    "BACKEND",
    "adam_update",
    "l2_normalize_rows",
    "reference",
    "relu",
    "relu_grad",
    "softmax_grad_rows",
    "softmax_rows",
    "sorted_pairwise_l1",
]
