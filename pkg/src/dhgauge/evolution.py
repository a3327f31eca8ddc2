"""Dynamics of descriptor states.

Gates act by Heisenberg conjugation, Hamiltonians by the flow
``dX/dt = -i [H(X), X]`` (hbar = 1), and a time-dependent gauge adds a
connection term to that flow.  :func:`schrodinger_oracle` evolves the
state vector instead and serves as an independent reference.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .descriptor import AXIS_LETTERS, DEFAULT_LIMITS, DescriptorState, substitute, to_dense, to_pauli_sum
from .errors import CapExceededError, ParseError
from .pauli import PauliSum

#: Orientation of the Hamiltonian flow.  ``X(t) = U^dagger X U`` with
#: ``U = exp(+1j * HEISENBERG_ORIENTATION * H * t)``, which gives
#: ``dX/dt = -1j * HEISENBERG_ORIENTATION * [H, X]``.  The value +1 solves
#: ``dX/dt = -i [H, X]``; the finite-difference tests pin it.
HEISENBERG_ORIENTATION = 1

GATE_ARITY = {
    "I": 1, "X": 1, "Y": 1, "Z": 1, "H": 1, "S": 1, "T": 1,
    "RX": 1, "RY": 1, "RZ": 1,
    "CNOT": 2, "CZ": 2, "SWAP": 2,
}
PARAM_COUNT = {"RX": 1, "RY": 1, "RZ": 1}

_FIXED = {
    "I": tensor.I2,
    "X": tensor.SX,
    "Y": tensor.SY,
    "Z": tensor.SZ,
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _rotation(letter, theta):
    return math.cos(theta / 2) * tensor.I2 - 1j * math.sin(theta / 2) * tensor.PAULI[letter]


@dataclass(frozen=True)
class Gate:
    name: str
    targets: tuple
    params: tuple = ()
    custom_matrix: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.name == "CUSTOM":
            if self.custom_matrix is None:
                raise ValueError("CUSTOM gate needs a matrix")
            m = tensor.as_matrix(self.custom_matrix)
            object.__setattr__(self, "custom_matrix", m)
            arity = tensor.num_qubits(m.shape[0]) if m.shape[0] == m.shape[1] else -1
            if not tensor.is_unitary(m):
                raise ValueError("CUSTOM gate matrix is not unitary")
        elif self.name in GATE_ARITY:
            arity = GATE_ARITY[self.name]
            if len(self.params) != PARAM_COUNT.get(self.name, 0):
                raise ValueError(f"gate {self.name} takes {PARAM_COUNT.get(self.name, 0)} params")
        else:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.targets) != arity or len(set(self.targets)) != arity:
            raise ValueError(f"gate {self.name} needs {arity} distinct targets, got {self.targets}")
        if any(t < 0 for t in self.targets):
            raise ValueError("negative target")

    def matrix(self):
        if self.name == "CUSTOM":
            return self.custom_matrix
        if self.name in PARAM_COUNT:
            return _rotation(self.name[1], self.params[0])
        return _FIXED[self.name]

    def heisenberg_rules(self, n):
        """``{target: [rule_x, rule_y, rule_z]}`` as ``n``-qubit Pauli sums.

        ``rule_a`` is the (real) Pauli expansion of ``U^dagger sigma_a U``
        for ``sigma_a`` on that target, with letters placed on the targets.
        """
        u = self.matrix()
        k = len(self.targets)
        rules = {}
        for slot, q in enumerate(self.targets):
            row = []
            for letter in AXIS_LETTERS:
                p = tensor.embed_single_site(tensor.PAULI[letter], slot, k)
                local = PauliSum.from_matrix(u.conj().T @ p @ u)
                row.append(self._lift({s: c.real for s, c in local}, n))
            rules[q] = row
        return rules

    def _lift(self, local_terms, n):
        terms = {}
        for s, c in local_terms.items():
            full = ["I"] * n
            for t, letter in zip(self.targets, s):
                full[t] = letter
            terms["".join(full)] = c
        return PauliSum(terms, n)

    def pauli_sum(self, n):
        """Gate unitary as an ``n``-qubit Pauli sum, supported on its targets."""
        return self._lift(PauliSum.from_matrix(self.matrix()).terms, n)


@dataclass(frozen=True)
class Circuit:
    n: int
    ops: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.n < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.ops:
            if any(t >= self.n for t in g.targets):
                raise ValueError(f"gate {g.name} targets {g.targets} outside {self.n} qubits")


@dataclass(frozen=True)
class HamiltonianSpec:
    terms: PauliSum

    def __post_init__(self):
        if not self.terms.is_hermitian():
            raise ValueError("Hamiltonian must have real coefficients")

    @property
    def n(self):
        return self.terms.n


def apply_gate(state, g, conjugate_all=False):
    """Heisenberg update of the descriptors by gate ``g``.

    With ``U^dagger (sigma_a on t_k) U = sum_P r_P P`` on the gate's targets,
    the new target descriptor is ``sum_P r_P prod_j X_{P_j}^(t_j)`` built
    from the current target descriptors; other qubits are passed through
    bit-for-bit.  This equals conjugation by the gate written in the
    current frame, ``U~ = sum_P c_P prod_j X_{P_j}^(t_j)``, but keeps
    roundoff from compounding.

    ``conjugate_all`` additionally conjugates every non-target descriptor
    by ``U~`` (used by the locality audit to measure, not assume, that they
    do not move).
    """
    if any(t >= state.n for t in g.targets):
        raise ValueError(f"gate {g.name} targets {g.targets} outside {state.n} qubits")
    if g.name == "I":
        return state
    rules = g.heisenberg_rules(state.n)
    tracked = state.tracked_unitary
    if tracked is not None:
        tracked = tensor.embed_operator(g.matrix(), g.targets, state.n) @ tracked
    others = [q for q in range(state.n) if q not in g.targets] if conjugate_all else []
    if state.backend == "dense":
        d = state.descriptors.copy()
        for q in g.targets:
            for a in range(3):
                d[q, a] = substitute(state, rules[q][a])
        if others:
            u_frame = substitute(state, g.pauli_sum(state.n))
            u_dag = u_frame.conj().T
            for q in others:
                d[q] = u_dag @ state.descriptors[q] @ u_frame
        return state.with_(descriptors=d, tracked_unitary=tracked)
    d = [list(t) for t in state.descriptors]
    for q in g.targets:
        d[q] = [substitute(state, rules[q][a]) for a in range(3)]
    if others:
        cap = state.limits.term_cap
        u_frame = substitute(state, g.pauli_sum(state.n))
        u_dag = u_frame.dagger()
        for q in others:
            d[q] = [u_dag.compose(x, cap=cap).compose(u_frame, cap=cap) for x in d[q]]
    return state.with_(descriptors=d, tracked_unitary=tracked)


def run_circuit(state, c):
    if c.n != state.n:
        raise ValueError(f"circuit has {c.n} qubits, state has {state.n}")
    for g in c.ops:
        state = apply_gate(state, g)
    return state


def flow_unitary(h_frame, t, orientation=None):
    """``U`` with ``X(t) = U^dagger X U`` for the frame Hamiltonian ``h_frame``."""
    sign = HEISENBERG_ORIENTATION if orientation is None else orientation
    return tensor.mat_exp(1j * sign * t * h_frame)


def _hamiltonian_terms(h):
    return h.terms if isinstance(h, HamiltonianSpec) else HamiltonianSpec(h).terms


def evolve_hamiltonian(state, h, t, orientation=None):
    """Exact Hamiltonian flow for time ``t``.

    For a time-independent ``H``, ``H(X(t)) = H(X(0))``, so the flow is a
    single conjugation by ``exp(i H(X(0)) t)``.  The pauli-sum backend is
    evolved through the dense representation and decomposed again.
    """
    ham = _hamiltonian_terms(h)
    if ham.n != state.n:
        raise ValueError(f"Hamiltonian has {ham.n} qubits, state has {state.n}")
    if len(ham) == 0 or t == 0:
        return state
    if state.backend == "pauli-sum":
        return to_pauli_sum(evolve_hamiltonian(to_dense(state), ham, t, orientation))
    u = flow_unitary(substitute(state, ham), t, orientation)
    u_dag = u.conj().T
    d = u_dag[None, None] @ state.descriptors @ u[None, None]
    tracked = state.tracked_unitary
    if tracked is not None:
        tracked = tracked @ u
    return state.with_(descriptors=d, tracked_unitary=tracked)


def _functional(d, ham):
    """``H(X)`` evaluated on a raw ``(n, 3, dim, dim)`` descriptor array."""
    dim = d.shape[-1]
    out = np.zeros((dim, dim), dtype=complex)
    for s, c in ham:
        term = None
        for q, letter in enumerate(s):
            if letter != "I":
                x = d[q, AXIS_LETTERS.index(letter)]
                term = x if term is None else term @ x
        out += c * (np.eye(dim) if term is None else term)
    return out


def gauged_rhs(d, ham, connection):
    """Right-hand side ``-i[H(X'), X'] - i[K, X']`` with ``K = -i V^dagger dV/dt``."""
    gen = HEISENBERG_ORIENTATION * _functional(d, ham) + connection
    return -1j * (gen @ d - d @ gen)


def integrate_gauged_flow(state0, h, fam, t, dt):
    """RK4 integration of the gauge-modified descriptor flow.

    Starts from ``V(0)^dagger X V(0)`` and integrates to time ``t`` with
    ``ceil(t/dt)`` equal steps (the step is shrunk so that it divides
    ``t``).  The result is untracked.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t < 0:
        raise ValueError("t must be non-negative")
    from .gauge import apply_gauge

    ham = _hamiltonian_terms(h)
    state0 = to_dense(state0)
    if ham.n != state0.n:
        raise ValueError(f"Hamiltonian has {ham.n} qubits, state has {state0.n}")
    y = apply_gauge(state0, fam.at(0.0)).descriptors.copy()
    steps = max(1, math.ceil(t / dt - 1e-9)) if t > 0 else 0
    step = t / steps if steps else 0.0

    def rhs(tau, y):
        return gauged_rhs(y, ham, fam.connection(tau))

    for k in range(steps):
        tau = k * step
        k1 = rhs(tau, y)
        k2 = rhs(tau + step / 2, y + step / 2 * k1)
        k3 = rhs(tau + step / 2, y + step / 2 * k2)
        k4 = rhs(tau + step, y + step * k3)
        y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return DescriptorState(state0.n, "dense", y, None, state0.limits)


def gauged_closed_form(state0, h, fam, t):
    """``V(t)^dagger X(t) V(t)`` with ``X(t)`` from :func:`evolve_hamiltonian`."""
    from .gauge import apply_gauge

    return apply_gauge(evolve_hamiltonian(to_dense(state0), h, t), fam.at(t))


def _apply_to_vector(psi, op, targets, n):
    k = len(targets)
    t = psi.reshape((2,) * n)
    t = np.tensordot(op.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), list(targets)))
    # tensordot puts the gate's output axes first; move them back into place
    t = np.moveaxis(t, list(range(k)), list(targets))
    return t.reshape(-1)


def schrodinger_oracle(c, dense_cap=DEFAULT_LIMITS.dense_cap):
    """``U_c |0...0>`` by direct state-vector evolution."""
    if c.n > dense_cap:
        raise CapExceededError(f"{c.n} qubits exceeds dense cap {dense_cap}")
    psi = np.zeros(1 << c.n, dtype=complex)
    psi[0] = 1.0
    for g in c.ops:
        psi = _apply_to_vector(psi, g.matrix(), g.targets, c.n)
    return psi


CLIFFORD_T = ("H", "S", "T", "X", "Y", "Z", "CNOT", "CZ", "SWAP")
UNIVERSAL = ("H", "S", "T", "X", "Y", "Z", "RX", "RY", "RZ", "CNOT", "CZ", "SWAP")


def random_circuit(n, depth, seed, gates=UNIVERSAL):
    """Seeded random circuit of exactly ``depth`` gates."""
    rng = np.random.default_rng(seed)
    pool = [g for g in gates if GATE_ARITY[g] <= n]
    ops = []
    for _ in range(depth):
        name = pool[rng.integers(len(pool))]
        targets = tuple(int(q) for q in rng.choice(n, size=GATE_ARITY[name], replace=False))
        params = tuple(rng.uniform(-math.pi, math.pi, size=PARAM_COUNT.get(name, 0)))
        ops.append(Gate(name, targets, params))
    return Circuit(n, ops)


# -- JSON formats ---------------------------------------------------------

def circuit_from_json(doc):
    if not isinstance(doc, dict):
        raise ParseError("circuit must be a JSON object")
    n = doc.get("qubits")
    ops = doc.get("ops", [])
    if not isinstance(n, int) or isinstance(n, bool) or not isinstance(ops, list):
        raise ParseError("circuit needs integer 'qubits' and an 'ops' list")
    gates = []
    try:
        for op in ops:
            if not isinstance(op, dict) or "gate" not in op:
                raise ParseError(f"bad circuit op {op!r}")
            matrix = op.get("matrix")
            if matrix is not None:
                from .serial import decode_matrix

                matrix = decode_matrix(matrix)
            gates.append(Gate(op["gate"], op.get("targets", []), op.get("params", []), matrix))
        return Circuit(n, gates)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid circuit: {exc}") from exc


def circuit_to_json(c):
    from .serial import FORMAT_VERSION, encode_matrix

    ops = []
    for g in c.ops:
        op = {"gate": g.name, "targets": list(g.targets)}
        if g.params:
            op["params"] = list(g.params)
        if g.name == "CUSTOM":
            op["matrix"] = encode_matrix(g.custom_matrix)
        ops.append(op)
    return {"version": FORMAT_VERSION, "qubits": c.n, "ops": ops}


def hamiltonian_from_json(doc, n=None):
    from .serial import decode_pauli_sum

    ps = decode_pauli_sum(doc, n, real=True)
    try:
        return HamiltonianSpec(ps)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
