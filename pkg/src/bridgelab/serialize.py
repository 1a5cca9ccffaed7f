"""Canonical JSON for keys, ciphertexts and reports.

Keys and ciphertexts serialize as nested arrays of base-10 integers.
Objects may opt in with a ``__json__`` method.
"""
import dataclasses
import json
from fractions import Fraction

import numpy as np


def to_jsonable(obj):
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if hasattr(obj, "__json__"):
        return to_jsonable(obj.__json__())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if dataclasses.is_dataclass(obj):
        return [to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=None):
    return json.dumps(to_jsonable(obj), indent=indent)


def shape_of(obj):
    """Structure of a jsonable value with the numbers erased."""
    if isinstance(obj, list):
        return [shape_of(x) for x in obj]
    if isinstance(obj, dict):
        return {k: shape_of(v) for k, v in obj.items()}
    return type(obj).__name__
