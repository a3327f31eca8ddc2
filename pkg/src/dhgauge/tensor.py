"""Dense complex linear algebra on qubit registers.

Ordering convention, used everywhere in the package: qubit 0 is the
leftmost (most significant) tensor factor, so ``|q0 q1 ... q_{n-1}>`` has
index ``q0 * 2**(n-1) + ... + q_{n-1}``.
"""

from functools import reduce

import numpy as np
import scipy.linalg

ATOL_STRUCTURE = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

#: Single-qubit Pauli matrices indexed by letter.
PAULI = {"I": I2, "X": SX, "Y": SY, "Z": SZ}
PAULI_LETTERS = "IXYZ"
_BASIS = np.stack([PAULI[a] for a in PAULI_LETTERS])


def as_matrix(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    return m


def num_qubits(dim):
    """Return ``n`` with ``2**n == dim``; raise for non powers of two."""
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _square_qubits(m):
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return num_qubits(m.shape[0])


def kron(a, b):
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats):
    return reduce(np.kron, [as_matrix(m) for m in mats], np.eye(1, dtype=complex))


def max_norm(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a, atol=ATOL_STRUCTURE):
    a = as_matrix(a)
    return a.shape[0] == a.shape[1] and max_norm(a - a.conj().T) <= atol


def is_unitary(a, atol=ATOL_STRUCTURE):
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return max_norm(a.conj().T @ a - np.eye(a.shape[0])) <= atol


def embed_single_site(op, site, n):
    """Place a 2x2 operator on qubit ``site`` of an ``n``-qubit register."""
    op = as_matrix(op)
    if op.shape != (2, 2):
        raise ValueError(f"single-site operator must be 2x2, got {op.shape}")
    if not 0 <= site < n:
        raise IndexError(f"site {site} out of range for {n} qubits")
    left = np.eye(1 << site, dtype=complex)
    right = np.eye(1 << (n - site - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


def embed_operator(op, targets, n):
    """Embed a ``2^k x 2^k`` operator acting on ``targets`` (in order).

    ``targets[0]`` is matched with the leftmost factor of ``op``.
    """
    op = as_matrix(op)
    targets = list(targets)
    k = _square_qubits(op)
    if k != len(targets):
        raise ValueError(f"operator acts on {k} qubits but {len(targets)} targets given")
    if len(set(targets)) != k or any(not 0 <= t < n for t in targets):
        raise IndexError(f"invalid targets {targets} for {n} qubits")
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(op, np.eye(1 << len(rest), dtype=complex))
    # axes of `full` are (targets..., rest...) for rows, same for columns
    order = targets + rest
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(1 << n, 1 << n)


def mat_exp(a):
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"mat_exp needs a square matrix, got shape {a.shape}")
    return scipy.linalg.expm(a)


def partial_trace(rho, keep, n):
    """Trace out every qubit not in ``keep``.

    The kept factors stay in ascending qubit order.  An empty ``keep``
    returns the 1x1 matrix ``[[trace(rho)]]``.
    """
    rho = as_matrix(rho)
    if rho.shape != (1 << n, 1 << n):
        raise ValueError(f"rho has shape {rho.shape}, expected {(1 << n, 1 << n)}")
    keep = sorted(set(keep))
    if any(not 0 <= q < n for q in keep):
        raise IndexError(f"keep-set {keep} out of range for {n} qubits")
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    t = t.transpose(keep + drop + [n + q for q in keep] + [n + q for q in drop])
    dk, dd = 1 << len(keep), 1 << len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def min_eigenvalue(a):
    """Smallest eigenvalue of the Hermitian part of ``a``."""
    a = as_matrix(a)
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])


def pauli_coefficients(m):
    """Coefficients ``c`` with ``m = sum_P c[P] * P``, shape ``(4,) * n``.

    Axis ``k`` indexes the letter (``IXYZ``) on qubit ``k``.
    """
    m = as_matrix(m)
    n = _square_qubits(m)
    t = m.reshape((2,) * (2 * n))
    # interleave (row_k, col_k) pairs into one axis of length 4 per qubit
    t = t.transpose([ax for k in range(n) for ax in (k, n + k)]).reshape((4,) * n)
    # c_a = Tr(P_a M) / 2 = sum_{i,j} P_a[j, i] M[i, j] / 2
    fwd = _BASIS.transpose(0, 2, 1).reshape(4, 4) / 2
    for k in range(n):
        t = np.moveaxis(np.tensordot(fwd, t, axes=([1], [k])), 0, k)
    return t


def matrix_from_pauli_coefficients(c):
    """Inverse of :func:`pauli_coefficients`."""
    c = np.asarray(c, dtype=complex)
    n = c.ndim
    if c.shape != (4,) * n:
        raise ValueError(f"coefficient tensor must have shape (4,)*n, got {c.shape}")
    inv = _BASIS.reshape(4, 4).T  # inv[2i+j, a] = P_a[i, j]
    t = c
    for k in range(n):
        t = np.moveaxis(np.tensordot(inv, t, axes=([1], [k])), 0, k)
    t = t.reshape((2,) * (2 * n))
    t = t.transpose([2 * k for k in range(n)] + [2 * k + 1 for k in range(n)])
    return t.reshape(1 << n, 1 << n)
