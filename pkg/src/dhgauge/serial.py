"""JSON encodings shared by the file formats.

Complex numbers are ``[re, im]`` pairs and matrices are row-major lists of
rows.  Every top-level document carries ``"version": 1``.
"""

import json
import os
import tempfile

import numpy as np

from .errors import ParseError
from .pauli import PauliSum

FORMAT_VERSION = 1


def encode_complex(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ParseError(f"expected a real number or [re, im] pair, got {v!r}")


def encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(z) for z in row] for row in m]


def decode_matrix(rows):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError("matrix must be a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParseError("matrix rows have unequal lengths")
    return np.array([[decode_complex(z) for z in r] for r in rows], dtype=complex)


def encode_pauli_sum(ps, real=False):
    terms = []
    for s, c in ps:
        terms.append({"pauli": s, "coeff": float(c.real) if real else encode_complex(c)})
    return {"terms": terms}


def decode_pauli_sum(doc, n=None, real=False):
    if not isinstance(doc, dict) or not isinstance(doc.get("terms"), list):
        raise ParseError("Pauli sum must be an object with a 'terms' list")
    items = []
    for t in doc["terms"]:
        if not isinstance(t, dict) or "pauli" not in t or "coeff" not in t:
            raise ParseError(f"bad Pauli term {t!r}")
        c = t["coeff"]
        if real and not isinstance(c, (int, float)):
            raise ParseError(f"coefficient of {t['pauli']!r} must be real")
        items.append((t["pauli"], decode_complex(c)))
    if n is None and not items:
        raise ParseError("empty Pauli sum without a qubit count")
    try:
        return PauliSum(items, n)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
