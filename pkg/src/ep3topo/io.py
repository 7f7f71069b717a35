"""Deterministic text output shared by the CSV and JSON writers."""
from __future__ import annotations

import math

__all__ = ["format_float"]


def format_float(x) -> str:
    """Shortest round-trip decimal for ``x`` (at most 17 significant digits).

    ``repr`` of a Python float is locale independent and always uses ``.``.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be written")
    if x == 0:
        return "0.0"
    return repr(x)
