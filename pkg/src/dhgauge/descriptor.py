"""Deutsch-Hayden descriptor states.

Each qubit ``i`` carries three Heisenberg-picture operators
``X_a^(i)`` (``a`` in x, y, z) acting on the whole register.  The state
vector is the fixed reference ``|0...0>`` and is never stored.  Two
backends hold the operators: dense matrices, and :class:`PauliSum` values
(compact for Clifford circuits).
"""

from dataclasses import dataclass, replace

import numpy as np

from . import serial, tensor
from .errors import CapExceededError, ParseError
from .pauli import PauliSum, all_strings, as_pauli_sum

AXES = "xyz"
AXIS_LETTERS = "XYZ"
BACKENDS = ("dense", "pauli-sum")

FOOTPRINT_TOL = 1e-10
ROUNDTRIP_TOL = 1e-10


@dataclass(frozen=True)
class Limits:
    """Size caps; every one is overridable from the CLI."""

    dense_cap: int = 10
    decomposition_cap: int = 8
    term_cap: int = 4096
    reconstruction_cap: int = 8


DEFAULT_LIMITS = Limits()


class DescriptorState:
    """Immutable descriptor assignment for ``n`` qubits.

    ``descriptors`` is, for the dense backend, a read-only complex array
    of shape ``(n, 3, 2**n, 2**n)``; for the pauli-sum backend, a tuple of
    ``n`` triples of :class:`PauliSum`.  ``tracked_unitary`` (optional) is
    the accumulated ``W`` with ``X_a^(i) = W^dagger (sigma_a on i) W``.
    """

    __slots__ = ("n", "backend", "descriptors", "tracked_unitary", "limits")

    def __init__(self, n, backend, descriptors, tracked_unitary=None, limits=DEFAULT_LIMITS):
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}")
        if backend == "dense":
            d = np.array(descriptors, dtype=complex)
            if d.shape != (n, 3, 1 << n, 1 << n):
                raise ValueError(f"dense descriptors have shape {d.shape}")
            d.flags.writeable = False
            descriptors = d
        else:
            descriptors = tuple(tuple(t) for t in descriptors)
            if len(descriptors) != n or any(len(t) != 3 for t in descriptors):
                raise ValueError("pauli-sum descriptors must be n triples")
            for triple in descriptors:
                for op in triple:
                    if not isinstance(op, PauliSum) or op.n != n:
                        raise ValueError("descriptor is not an n-qubit PauliSum")
                    if len(op) == 0:
                        raise ValueError("zero PauliSum cannot be a descriptor (X^2 = I fails)")
        if tracked_unitary is not None:
            tracked_unitary = np.array(tracked_unitary, dtype=complex)
            if tracked_unitary.shape != (1 << n, 1 << n):
                raise ValueError("tracked unitary has the wrong dimension")
            tracked_unitary.flags.writeable = False
        self.n = n
        self.backend = backend
        self.descriptors = descriptors
        self.tracked_unitary = tracked_unitary
        self.limits = limits

    def __repr__(self):
        tracked = "tracked" if self.tracked_unitary is not None else "untracked"
        return f"DescriptorState(n={self.n}, backend={self.backend!r}, {tracked})"

    @property
    def dim(self):
        return 1 << self.n

    def descriptor(self, qubit, axis):
        """Operator for ``axis`` (``'x'|'y'|'z'`` or 0..2) of ``qubit``."""
        a = AXES.index(axis) if isinstance(axis, str) else axis
        return self.descriptors[qubit][a]

    def letter_operator(self, qubit, letter):
        if letter == "I":
            if self.backend == "dense":
                return np.eye(self.dim, dtype=complex)
            return PauliSum.identity(self.n)
        return self.descriptor(qubit, AXIS_LETTERS.index(letter))

    def with_(self, **changes):
        kw = {s: getattr(self, s) for s in self.__slots__}
        kw.update(changes)
        return DescriptorState(**kw)


def init(n, backend="dense", limits=DEFAULT_LIMITS):
    """Fresh state: every descriptor is the embedded Pauli matrix."""
    if n < 1:
        raise ValueError("need at least one qubit")
    if backend == "dense":
        if n > limits.dense_cap:
            raise CapExceededError(f"{n} qubits exceeds dense cap {limits.dense_cap}")
        d = np.empty((n, 3, 1 << n, 1 << n), dtype=complex)
        for i in range(n):
            for a, letter in enumerate(AXIS_LETTERS):
                d[i, a] = tensor.embed_single_site(tensor.PAULI[letter], i, n)
        return DescriptorState(n, "dense", d, np.eye(1 << n, dtype=complex), limits)
    if backend == "pauli-sum":
        d = [[PauliSum.single(letter, i, n) for letter in AXIS_LETTERS] for i in range(n)]
        tracked = np.eye(1 << n, dtype=complex) if n <= limits.dense_cap else None
        return DescriptorState(n, "pauli-sum", d, tracked, limits)
    raise ValueError(f"unknown backend {backend!r}")


def substitute(state, obs):
    """Operator obtained by replacing each letter at slot ``i`` with ``X^(i)``.

    Returns a dense matrix or a PauliSum according to the backend.  Slots
    are multiplied in ascending qubit order.
    """
    obs = as_pauli_sum(obs, state.n)
    if state.backend == "dense":
        out = np.zeros((state.dim, state.dim), dtype=complex)
        for s, c in obs:
            term = None
            for q, letter in enumerate(s):
                if letter == "I":
                    continue
                d = state.descriptors[q, AXIS_LETTERS.index(letter)]
                term = d if term is None else term @ d
            out += c * (np.eye(state.dim) if term is None else term)
        return out
    out = PauliSum.zero(state.n)
    cap = state.limits.term_cap
    for s, c in obs:
        term = PauliSum.identity(state.n)
        for q, letter in enumerate(s):
            if letter != "I":
                term = term.compose(state.letter_operator(q, letter), cap=cap)
        out = out + term * c
    if len(out) > cap:
        raise CapExceededError(f"Pauli sum has {len(out)} terms, cap is {cap}")
    return out


def expectation(state, obs):
    """``<0| O |0>`` with ``O`` the observable written in the descriptors."""
    obs = as_pauli_sum(obs, state.n)
    if state.backend == "pauli-sum":
        return complex(substitute(state, obs).reference_expectation())
    total = 0j
    for s, c in obs:
        row = None
        for q, letter in enumerate(s):
            if letter == "I":
                continue
            d = state.descriptors[q, AXIS_LETTERS.index(letter)]
            row = d[0].copy() if row is None else row @ d
        total += c * (1.0 if row is None else row[0])
    return complex(total)


def pauli_expectations(state, subset):
    """Expectations of every Pauli string supported on ``subset``.

    Returns an array of shape ``(4,) * len(subset)``; axis ``k`` is the
    letter (``IXYZ``) on ``sorted(subset)[k]``.
    """
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("subset must be non-empty")
    if any(not 0 <= q < state.n for q in subset):
        raise IndexError(f"subset {subset} out of range for {state.n} qubits")
    k = len(subset)
    if state.backend == "dense":
        d = state.dim
        rows = np.zeros((1, d), dtype=complex)
        rows[0, 0] = 1.0
        for j, q in enumerate(subset):
            stack = np.concatenate([np.eye(d, dtype=complex)[None], state.descriptors[q]])
            if j < k - 1:
                # new row index = old index * 4 + letter, i.e. C order over letters
                rows = np.einsum("pi,aij->paj", rows, stack).reshape(-1, d)
            else:
                vals = np.einsum("pi,ai->pa", rows, stack[:, :, 0])
        return vals.reshape((4,) * k)
    vals = np.empty(4**k, dtype=complex)
    for idx, sub in enumerate(all_strings(k)):
        s = ["I"] * state.n
        for q, letter in zip(subset, sub):
            s[q] = letter
        vals[idx] = expectation(state, "".join(s))
    return vals.reshape((4,) * k)


def reduced_density(state, subset):
    """Density operator of ``subset`` rebuilt from descriptor expectations."""
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("subset must be non-empty")
    if len(subset) > state.limits.reconstruction_cap:
        raise CapExceededError(
            f"reconstruction of {len(subset)} qubits exceeds cap {state.limits.reconstruction_cap}"
        )
    ev = pauli_expectations(state, subset)
    rho = tensor.matrix_from_pauli_coefficients(ev / (1 << len(subset)))
    return (rho + rho.conj().T) / 2


def initial_descriptor(n, qubit, axis, backend):
    letter = AXIS_LETTERS[axis]
    if backend == "dense":
        return tensor.embed_single_site(tensor.PAULI[letter], qubit, n)
    return PauliSum.single(letter, qubit, n)


def descriptor_distance(a, b):
    if isinstance(a, PauliSum):
        return a.max_norm_distance(b)
    return tensor.max_norm(a - b)


def footprint(state, tol=FOOTPRINT_TOL):
    """Qubits whose descriptor triple has moved away from its initial value."""
    moved = set()
    for q in range(state.n):
        for a in range(3):
            ref = initial_descriptor(state.n, q, a, state.backend)
            if descriptor_distance(state.descriptors[q][a], ref) > tol:
                moved.add(q)
                break
    return moved


def to_dense(state):
    if state.backend == "dense":
        return state
    if state.n > state.limits.dense_cap:
        raise CapExceededError(f"{state.n} qubits exceeds dense cap {state.limits.dense_cap}")
    d = np.array([[op.to_matrix() for op in triple] for triple in state.descriptors])
    return state.with_(backend="dense", descriptors=d)


def to_pauli_sum(state):
    if state.backend == "pauli-sum":
        return state
    cap = state.limits.decomposition_cap
    if state.n > cap:
        raise CapExceededError(f"{state.n} qubits exceeds decomposition cap {cap}")
    d = []
    for triple in state.descriptors:
        row = []
        for m in triple:
            ps = PauliSum.from_matrix(m, cap=cap)
            if len(ps) > state.limits.term_cap:
                raise CapExceededError(f"descriptor has {len(ps)} terms, cap is {state.limits.term_cap}")
            row.append(ps)
        d.append(row)
    return state.with_(backend="pauli-sum", descriptors=d)


def descriptor_matrices(state):
    """Dense ``(n, 3, d, d)`` array of the descriptors regardless of backend."""
    return to_dense(state).descriptors


def invariant_violations(state, tol=1e-8, herm_tol=1e-10):
    """List human-readable descriptions of every broken state invariant."""
    d = descriptor_matrices(state)
    n, dim = state.n, state.dim
    eye = np.eye(dim)
    out = []
    eps = {(0, 1): 2, (1, 2): 0, (2, 0): 1}
    for i in range(n):
        for a in range(3):
            if not tensor.is_hermitian(d[i, a], herm_tol):
                out.append(f"X_{AXES[a]}^({i}) not Hermitian")
            for b in range(3):
                prod = d[i, a] @ d[i, b]
                if a == b:
                    want = eye
                elif (a, b) in eps:
                    want = 1j * d[i, eps[(a, b)]]
                else:
                    want = -1j * d[i, eps[(b, a)]]
                if tensor.max_norm(prod - want) > tol:
                    out.append(f"Pauli algebra broken for X_{AXES[a]}^({i}) X_{AXES[b]}^({i})")
        for j in range(i + 1, n):
            for a in range(3):
                for b in range(3):
                    comm = d[i, a] @ d[j, b] - d[j, b] @ d[i, a]
                    if tensor.max_norm(comm) > tol:
                        out.append(f"X_{AXES[a]}^({i}) and X_{AXES[b]}^({j}) do not commute")
    w = state.tracked_unitary
    if w is not None:
        for i in range(n):
            for a in range(3):
                ref = w.conj().T @ initial_descriptor(n, i, a, "dense") @ w
                if tensor.max_norm(ref - d[i, a]) > tol:
                    out.append(f"X_{AXES[a]}^({i}) disagrees with tracked unitary")
    return out


# -- snapshots ------------------------------------------------------------

def to_snapshot(state):
    if state.backend == "dense":
        desc = [[serial.encode_matrix(m) for m in triple] for triple in state.descriptors]
    else:
        desc = [[serial.encode_pauli_sum(op) for op in triple] for triple in state.descriptors]
    doc = {
        "version": serial.FORMAT_VERSION,
        "n": state.n,
        "backend": state.backend,
        "descriptors": desc,
    }
    if state.tracked_unitary is not None:
        doc["tracked_unitary"] = serial.encode_matrix(state.tracked_unitary)
    return doc


def from_snapshot(doc, limits=DEFAULT_LIMITS, validate=True):
    if not isinstance(doc, dict) or doc.get("version") != serial.FORMAT_VERSION:
        raise ParseError("snapshot must be an object with version 1")
    n = doc.get("n")
    backend = doc.get("backend")
    if not isinstance(n, int) or n < 1 or backend not in BACKENDS:
        raise ParseError("snapshot needs integer n >= 1 and a known backend")
    if backend == "dense" and n > limits.dense_cap:
        raise CapExceededError(f"{n} qubits exceeds dense cap {limits.dense_cap}")
    desc = doc.get("descriptors")
    if not isinstance(desc, list) or len(desc) != n:
        raise ParseError("snapshot descriptors must list one triple per qubit")
    try:
        if backend == "dense":
            d = np.array([[serial.decode_matrix(m) for m in t] for t in desc])
        else:
            d = [[serial.decode_pauli_sum(op, n) for op in t] for t in desc]
        tracked = doc.get("tracked_unitary")
        if tracked is not None:
            tracked = serial.decode_matrix(tracked)
        state = DescriptorState(n, backend, d, tracked, limits)
    except ValueError as exc:
        raise ParseError(f"invalid snapshot: {exc}") from exc
    if validate:
        bad = invariant_violations(state)
        if bad:
            raise ParseError("snapshot violates descriptor invariants: " + "; ".join(bad[:3]))
    return state


def with_limits(state, limits):
    return state.with_(limits=replace(limits))
