"""Backend selection for the hot kernels.

The compiled module is preferred. Set LOGCRIT_PURE_PYTHON=1 to force the
numpy/scipy fallback (the benchmark and the backend tests do this).
"""
import os

from . import _kernels_py

LOG_FLOOR = _kernels_py.LOG_FLOOR

_impl = _kernels_py
BACKEND = "python"
if not os.environ.get("LOGCRIT_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

tridiag_factor = _impl.tridiag_factor
tridiag_solve = _impl.tridiag_solve
stiff_apply = _impl.stiff_apply
stiff_form = _impl.stiff_form
positive_moments = _impl.positive_moments
cross_moment = _impl.cross_moment
reaction = _impl.reaction
to_points = _impl.to_points
from_points = _impl.from_points


def available_backends():
    out = {"python": _kernels_py}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
