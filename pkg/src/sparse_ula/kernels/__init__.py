"""Hot numerical kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``SPARSE_ULA_NO_NUMBA`` is set to a non-empty value other than
``0``. :func:`set_backend` switches at runtime (benchmarks, tests).

Kernels expect contiguous float64/complex128 arrays and flat 1-D inputs
where noted; the public modules do the shaping.
"""

import os

from . import numpy_impl

try:
    from . import numba_impl
except ImportError:  # numba missing
    numba_impl = None

KERNELS = ("beam_gain", "two_lobe_gain", "synthesize_channels",
           "mrc_sinr", "zf_sinr", "mmse_sinr")

_IMPLS = {"numpy": numpy_impl}
if numba_impl is not None:
    _IMPLS["numba"] = numba_impl


def _env_disables_numba():
    flag = os.environ.get("SPARSE_ULA_NO_NUMBA", "")
    return flag not in ("", "0")


def available_backends():
    return tuple(_IMPLS)


def get_impl(name):
    try:
        return _IMPLS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; "
                         f"available: {available_backends()}") from None


def set_backend(name):
    """Bind the module-level kernel names to backend ``name``."""
    global BACKEND
    impl = get_impl(name)
    g = globals()
    for kernel in KERNELS:
        g[kernel] = getattr(impl, kernel)
    BACKEND = name


BACKEND = None
set_backend("numpy" if numba_impl is None or _env_disables_numba() else "numba")

