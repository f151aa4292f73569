"""Kernel compilation switch.

Hot loops live in ``_kernels`` and are compiled with numba by default.
Setting ``METABALANCE_NO_JIT=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``)
selects the pure-Python/numpy fallback path: the same functions, uncompiled,
producing bit-identical results. The fallback is orders of magnitude slower
and exists for debugging and environments without a working numba;
``benchmarks/bench_engine.py`` quantifies the gap.
"""

import os
import warnings


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


JIT_DISABLED = _flag("METABALANCE_NO_JIT") or _flag("NUMBA_DISABLE_JIT")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAVE_NUMBA = False

JIT_ENABLED = HAVE_NUMBA and not JIT_DISABLED

if not JIT_ENABLED:
    # uint64 hash/rng mixing wraps by design; numpy warns on scalar overflow
    # only in the uncompiled path.
    warnings.filterwarnings("ignore", message="overflow encountered")


def kernel(fn):
    """Compile ``fn`` as a nogil, cached numba kernel, or return it unchanged."""
    if JIT_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
