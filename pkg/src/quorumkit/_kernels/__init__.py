"""Kernel backend selection.

The hot numeric loops (distribution convolution, critical-size sweeps,
Monte Carlo tallies) exist twice: a numba-jitted build and a pure-numpy
build.  Selection order:

1. the ``QUORUMKIT_BACKEND`` environment variable (``numba`` | ``numpy``),
2. otherwise numba when importable, numpy as the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

ENV_VAR = "QUORUMKIT_BACKEND"

_nb_module: ModuleType | None = None
_nb_error: Exception | None = None


def _load_numba_backend() -> ModuleType:
    global _nb_module, _nb_error
    if _nb_module is None and _nb_error is None:
        try:
            from . import nb_backend

            _nb_module = nb_backend
        except ImportError as exc:  # numba not installed
            _nb_error = exc
    if _nb_module is None:
        raise RuntimeError(f"numba backend unavailable: {_nb_error}")
    return _nb_module


def available_backends() -> tuple[str, ...]:
    try:
        _load_numba_backend()
    except RuntimeError:
        return ("numpy",)
    return ("numba", "numpy")


def get_backend(name: str | None = None) -> ModuleType:
    """Resolve a kernel module by name, env var, or auto-detection."""
    from . import np_backend

    if name is None:
        name = os.environ.get(ENV_VAR, "").strip().lower() or "auto"
    if name == "auto":
        try:
            return _load_numba_backend()
        except RuntimeError:
            return np_backend
    if name == "numba":
        return _load_numba_backend()
    if name == "numpy":
        return np_backend
    raise ValueError(f"unknown kernel backend {name!r} (use 'numba' or 'numpy')")


def backend_name(name: str | None = None) -> str:
    mod = get_backend(name)
    return "numba" if mod.__name__.endswith("nb_backend") else "numpy"
