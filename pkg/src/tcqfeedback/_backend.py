"""Select the compiled kernels when available, else the numpy fallback.

Set ``TCQFEEDBACK_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and by the backend-equivalence tests).
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("TCQFEEDBACK_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def viterbi(target, points, next_state, out_symbol, incoming, start_state=0, impl=None):
    impl = impl or _impl
    target = np.ascontiguousarray(target, dtype=np.complex128)
    points = np.ascontiguousarray(
        np.broadcast_to(points, target.shape + (np.shape(points)[-1],)), dtype=np.complex128
    )
    return impl.viterbi(target, points, next_state, out_symbol, incoming, start_state)


def encode(inputs, next_state, out_symbol, start_state=0, impl=None):
    impl = impl or _impl
    inputs = np.ascontiguousarray(inputs, dtype=np.int64)
    return impl.encode(inputs, next_state, out_symbol, start_state)
