"""Backend selection for the hot numerical kernels.

The environment variable MTLAB_BACKEND picks the implementation:

* unset or empty: try the numba backend, fall back to numpy with a warning
* ``numba``: require the numba backend, raise if it cannot be loaded
* ``numpy``: use the pure numpy backend

Both backends expose the same functions and status codes; everything else
in the package imports them from here.
"""

from __future__ import annotations

import os
import warnings

_requested = os.environ.get("MTLAB_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"MTLAB_BACKEND must be 'numba', 'numpy', or unset, got {_requested!r}"
    )

if _requested == "numpy":
    from . import _kernels_np as _impl

    _backend = "numpy"
else:
    try:
        from . import _kernels_nb as _impl

        if not _impl.backend_ready():
            raise RuntimeError("numba kernel self-check failed")
        _backend = "numba"
    except Exception as exc:
        if _requested == "numba":
            raise ImportError(f"numba backend requested but unusable: {exc}") from exc
        warnings.warn(
            f"numba backend unavailable ({exc}), falling back to numpy kernels",
            RuntimeWarning,
            stacklevel=2,
        )
        from . import _kernels_np as _impl

        _backend = "numpy"

STATUS_OK = _impl.STATUS_OK
STATUS_OVERFLOW = _impl.STATUS_OVERFLOW
STATUS_NO_CONVERGENCE = _impl.STATUS_NO_CONVERGENCE

integrand_values = _impl.integrand_values
integrand_slopes = _impl.integrand_slopes
weighted_values = _impl.weighted_values
weighted_values_and_slopes = _impl.weighted_values_and_slopes
integrate_piecewise = _impl.integrate_piecewise
integrate_bubble = _impl.integrate_bubble


def backend_name() -> str:
    """Name of the kernel backend that was selected at import time."""
    return _backend
