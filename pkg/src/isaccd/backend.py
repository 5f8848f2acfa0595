"""Kernel backend selection: compiled extension when built, NumPy otherwise.

Set ``ISACCD_BACKEND=pure`` or ``ISACCD_BACKEND=ext`` to force a choice
(forcing ``ext`` raises if the extension is not built).  Both backends
implement the same contract; see ``_pure`` for its definition.
"""

from __future__ import annotations

import os

from . import _pure


def _load_ext():
    from . import _core  # noqa: PLC0415 - optional compiled module

    return _core


_requested = os.environ.get("ISACCD_BACKEND", "").strip().lower()
if _requested == "pure":
    _impl = _pure
elif _requested == "ext":
    _impl = _load_ext()
elif _requested == "":
    try:
        _impl = _load_ext()
    except ImportError:
        _impl = _pure
else:
    raise ValueError(f"ISACCD_BACKEND must be 'pure' or 'ext', got {_requested!r}")


def backend_name() -> str:
    """Name of the active kernel backend ('ext' or 'pure')."""
    return _impl.name


def get_backend(which: str | None = None):
    """Return a backend module by name, or the active one when None."""
    if which is None:
        return _impl
    if which == "pure":
        return _pure
    if which == "ext":
        return _load_ext()
    raise ValueError(f"unknown backend {which!r}")


project_rows = _impl.project_rows
evaluate = _impl.evaluate
ascend = _impl.ascend
