"""Pick the compiled kernels when importable, else the numpy fallback.

Set ``CYLSTABLE_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

_compiled = None
if os.environ.get("CYLSTABLE_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _compiled = None

NAME = "compiled" if _compiled is not None else "python"


def compiled():
    """The compiled module, or ``None``."""
    return _compiled


def python():
    return _pykernels


def stable_fill(out, seed, path0, step, alpha, scale, nthreads=1, backend=None):
    mod = _select(backend)
    mod.stable_fill(out, seed, path0, step, alpha, scale, nthreads)


def _select(backend):
    if backend == "python" or (backend is None and _compiled is None):
        return _pykernels
    if _compiled is None:
        raise RuntimeError("compiled backend requested but cylstable._kernels is not built")
    return _compiled
