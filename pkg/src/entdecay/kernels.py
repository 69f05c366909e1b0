"""Hot kernels: compiled extension when available, numpy fallback otherwise.

The choice is made once at import. Set ``ENTDECAY_PURE_PYTHON=1`` to force
the fallback (the test-suite runs both routes against each other).
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ENTDECAY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

herm_eig = _impl.herm_eig
singular_values = _impl.singular_values
concurrence = _impl.concurrence
apply_local = _impl.apply_local
evolved_concurrence = _impl.evolved_concurrence
esd_numeric = _impl.esd_numeric
kraus_ops = _kernels_py.kraus_ops

FINITE, ASYMPTOTIC, SEPARABLE, UNBRACKETED = 0, 1, 2, 3


def backends():
    """Mapping of available backend names to kernel modules."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
