"""JSON rendering with exact rationals shown next to their float values."""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = 1


def dual(q) -> dict:
    q = Fraction(q)
    text = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    return {"exact": text, "float": float(q)}


def jsonable(obj):
    """Recursively convert reports to JSON-ready values."""
    if isinstance(obj, Fraction):
        return dual(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        if hasattr(obj, "_asdict"):
            return jsonable(obj._asdict())
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj
