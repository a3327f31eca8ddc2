"""Pauli strings and sparse Pauli sums.

A Pauli string is a plain ``str`` over ``"IXYZ"`` with one letter per
qubit (qubit 0 first).  :class:`PauliSum` maps strings to complex
coefficients.
"""

import itertools

import numpy as np

from . import tensor
from .errors import CapExceededError

DROP_TOL = 1e-14
HERMITIAN_TOL = 1e-12

# (a, b) -> (phase, c) with a*b = phase * c
_LETTER_PRODUCT = {}
for _a in "IXYZ":
    _LETTER_PRODUCT[("I", _a)] = (1, _a)
    _LETTER_PRODUCT[(_a, "I")] = (1, _a)
    _LETTER_PRODUCT[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _LETTER_PRODUCT[(_a, _b)] = (1j, _c)
    _LETTER_PRODUCT[(_b, _a)] = (-1j, _c)


def validate_string(s, n=None):
    if not isinstance(s, str) or not s or any(ch not in "IXYZ" for ch in s):
        raise ValueError(f"invalid Pauli string {s!r}")
    if n is not None and len(s) != n:
        raise ValueError(f"Pauli string {s!r} has length {len(s)}, expected {n}")
    return s


def multiply_strings(a, b):
    """Return ``(phase, c)`` such that ``a @ b == phase * c``."""
    phase = 1
    out = []
    for x, y in zip(a, b):
        p, z = _LETTER_PRODUCT[(x, y)]
        phase *= p
        out.append(z)
    return phase, "".join(out)


def all_strings(n):
    """Every n-letter Pauli string in lexicographic ``IXYZ`` order."""
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n)]


def string_matrix(s):
    return tensor.kron_all([tensor.PAULI[ch] for ch in s])


class PauliSum:
    """Immutable linear combination of Pauli strings.

    Terms with ``|c| < 1e-14`` are dropped on construction, and terms on the
    same string are merged.  Iteration order is the sorted string order so
    that every derived quantity is deterministic.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, terms, n=None):
        if isinstance(terms, dict):
            items = terms.items()
        else:
            items = list(terms)
            if items and not isinstance(items[0][0], str):
                items = [(s, c) for c, s in items]
        acc = {}
        for s, c in items:
            if n is None:
                n = len(s)
            validate_string(s, n)
            acc[s] = acc.get(s, 0j) + complex(c)
        if n is None:
            raise ValueError("cannot infer qubit count of an empty PauliSum; pass n")
        self.n = n
        self._terms = {s: acc[s] for s in sorted(acc) if abs(acc[s]) >= DROP_TOL}

    @classmethod
    def identity(cls, n, coeff=1.0):
        return cls({"I" * n: coeff}, n)

    @classmethod
    def zero(cls, n):
        return cls({}, n)

    @classmethod
    def single(cls, letter, site, n, coeff=1.0):
        s = "I" * site + letter + "I" * (n - site - 1)
        return cls({s: coeff}, n)

    @classmethod
    def from_matrix(cls, m, cap=8):
        """Exact Pauli decomposition of a dense ``2^n x 2^n`` matrix."""
        m = tensor.as_matrix(m)
        n = tensor.num_qubits(m.shape[0])
        if n > cap:
            raise CapExceededError(f"Pauli decomposition of {n} qubits exceeds cap {cap}")
        c = tensor.pauli_coefficients(m)
        terms = {}
        for idx in zip(*np.nonzero(np.abs(c) >= DROP_TOL)):
            terms["".join("IXYZ"[i] for i in idx)] = c[idx]
        return cls(terms, n)

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def coeff(self, s):
        return self._terms.get(s, 0j)

    def __eq__(self, other):
        return isinstance(other, PauliSum) and self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, tuple(self._terms.items())))

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{s}" for s, c in self._terms.items()) or "0"
        return f"PauliSum({body})"

    def _check(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"qubit count mismatch: {self.n} vs {other.n}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        acc = dict(self._terms)
        for s, c in other._terms.items():
            acc[s] = acc.get(s, 0j) + c
        return PauliSum(acc, self.n)

    def __neg__(self):
        return PauliSum({s: -c for s, c in self._terms.items()}, self.n)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, PauliSum):
            return NotImplemented
        return PauliSum({s: c * scalar for s, c in self._terms.items()}, self.n)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return self.compose(other)

    def compose(self, other, cap=None):
        """Operator product ``self @ other``; optional term cap."""
        if self._check(other) is NotImplemented:
            raise TypeError("compose needs a PauliSum")
        acc = {}
        for s1, c1 in self._terms.items():
            for s2, c2 in other._terms.items():
                ph, s = multiply_strings(s1, s2)
                acc[s] = acc.get(s, 0j) + ph * c1 * c2
        if cap is not None:
            live = sum(1 for c in acc.values() if abs(c) >= DROP_TOL)
            if live > cap:
                raise CapExceededError(f"Pauli sum has {live} terms, cap is {cap}")
        return PauliSum(acc, self.n)

    def dagger(self):
        return PauliSum({s: c.conjugate() for s, c in self._terms.items()}, self.n)

    def is_hermitian(self, atol=HERMITIAN_TOL):
        return all(abs(c.imag) <= atol for c in self._terms.values())

    def max_norm_distance(self, other):
        diff = self - other
        return max((abs(c) for _, c in diff), default=0.0)

    def reference_expectation(self):
        """``<0...0| self |0...0>``: only strings over ``{I, Z}`` contribute."""
        return sum((c for s, c in self._terms.items() if set(s) <= {"I", "Z"}), 0j)

    def to_matrix(self):
        d = 1 << self.n
        out = np.zeros((d, d), dtype=complex)
        for s, c in self._terms.items():
            out += c * string_matrix(s)
        return out


def as_pauli_sum(obs, n=None):
    """Coerce a string, ``{string: coeff}`` dict or PauliSum."""
    if isinstance(obs, PauliSum):
        ps = obs
    elif isinstance(obs, str):
        ps = PauliSum({obs: 1.0})
    else:
        ps = PauliSum(obs, n)
    if n is not None and ps.n != n:
        raise ValueError(f"observable acts on {ps.n} qubits, state has {n}")
    return ps
