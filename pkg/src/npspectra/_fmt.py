"""Deterministic text output: every float printed with 17 significant digits."""
from __future__ import annotations

import math

import numpy as np


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    return format(x, ".17g")


def dumps(obj, indent=None, _level=0):
    """JSON text with fixed float formatting (``json.dumps`` uses shortest repr)."""
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if obj is None:
        return "null"
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return fmt(obj)
    if isinstance(obj, dict):
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}" if items else "{}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [dumps(v, None) for v in obj]
        return "[" + ", ".join(items) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
