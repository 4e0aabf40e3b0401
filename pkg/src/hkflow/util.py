"""Small shared helpers: deterministic serialization and rotations.

JSON written by this package must be byte-stable across runs with the same
inputs, so floats are always rendered with 17 significant digits (enough to
round-trip a double) instead of whatever repr() feels like.
"""
from __future__ import annotations

import numpy as np

from .errors import NonRotation


def format_float(x) -> str:
    """Render a double with 17 significant digits (round-trip exact)."""
    if isinstance(x, (np.floating,)):
        x = float(x)
    if x != x:
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def json_dumps(obj, indent: int = 0) -> str:
    """Serialize nested dict/list/scalar data with fixed float formatting.

    Only the types this package actually emits are supported: dict, list,
    tuple, str, bool, None, ints and floats (numpy scalars included).
    Dict keys keep insertion order, which callers keep deterministic.
    """
    out: list[str] = []
    _write(obj, out, indent, 0)
    return "".join(out)


def _write(obj, out: list, indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1)) if indent else ""
    end_pad = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, np.ndarray):
        _write(obj.tolist(), out, indent, level)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + nl)
        for k, (key, val) in enumerate(obj.items()):
            out.append(pad + '"' + str(key) + '": ')
            _write(val, out, indent, level + 1)
            out.append(("," if k < len(obj) - 1 else "") + nl)
        out.append(end_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[" + nl)
        for k, val in enumerate(obj):
            out.append(pad)
            _write(val, out, indent, level + 1)
            out.append(("," if k < len(obj) - 1 else "") + nl)
        out.append(end_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def check_rotation(a, tol: float = 1e-10) -> np.ndarray:
    """Validate a 3x3 rotation matrix (orthogonal, det = +1)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3):
        raise NonRotation(f"expected a 3x3 matrix, got shape {a.shape}")
    if not np.allclose(a @ a.T, np.eye(3), atol=tol):
        raise NonRotation("matrix is not orthogonal")
    if abs(np.linalg.det(a) - 1.0) > tol:
        raise NonRotation("matrix has determinant != +1")
    return a


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Draw a rotation uniformly-ish from SO(3) via QR with sign fixing."""
    m = rng.standard_normal((3, 3))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diagonal(r))
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return q
