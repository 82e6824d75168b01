"""Backend selection for the numeric inner loops.

The numba kernels are used by default. Set ``HARQPRED_DISABLE_NUMBA=1``
(before importing harqpred) to run the pure-numpy fallback instead; both
backends consume the same random draws and return the same outcomes.
"""
import os

from . import _kernels_numpy as numpy_backend

_FLAG = os.environ.get("HARQPRED_DISABLE_NUMBA", "").strip().lower()

numba_backend = None
if _FLAG not in ("1", "true", "yes", "on"):
    try:
        from . import _kernels_numba as numba_backend
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba_backend = None

active = numba_backend if numba_backend is not None else numpy_backend
BACKEND = "numba" if active is numba_backend else "numpy"

batch_burst = active.batch_burst
enumerate_burst = active.enumerate_burst
enumerate_schedule = active.enumerate_schedule
replay_burst = active.replay_burst
replay_schedule = active.replay_schedule


def backends():
    """Available backends as ``{name: module}``."""
    out = {"numpy": numpy_backend}
    if numba_backend is not None:
        out["numba"] = numba_backend
    return out
