"""Backend selection for the hot loops.

The compiled extension ``_core`` is used when it imports; otherwise the numpy
versions in ``_fallback`` are used.  ``DIVMOMENTS_PURE=1`` forces the fallback.
"""
import os

from . import _fallback

if os.environ.get("DIVMOMENTS_PURE") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

sieve_range = _impl.sieve_range
sieve_table = _impl.sieve_table
moment_block = _impl.moment_block
expsum = _impl.expsum
voronoi_sum = _impl.voronoi_sum


def get_backend(name):
    """Kernel module by name ("compiled" or "python"), for benchmarks and parity tests."""
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
