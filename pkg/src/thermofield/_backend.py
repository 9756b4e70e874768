"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. ``THERMOFIELD_BACKEND=python`` forces the fallback.
"""
from __future__ import annotations

import contextlib
import os
from types import ModuleType

from . import _pycore

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS: dict[str, ModuleType] = {"python": _pycore}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available() -> list[str]:
    return sorted(_BACKENDS)


def get(name: str | None = None) -> ModuleType:
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return kernels
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available()}") from None


def _select() -> ModuleType:
    forced = os.environ.get("THERMOFIELD_BACKEND")
    if forced:
        return get(forced)
    return _compiled if _compiled is not None else _pycore


kernels = _select()
NAME = "compiled" if kernels is _compiled else "python"


@contextlib.contextmanager
def use(name: str):
    """Temporarily route every public operation through backend ``name``."""
    global kernels, NAME
    saved = kernels, NAME
    kernels, NAME = get(name), name
    try:
        yield kernels
    finally:
        kernels, NAME = saved
