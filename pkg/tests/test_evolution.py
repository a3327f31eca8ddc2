import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dhgauge import descriptor, evolution, gauge, tensor
from dhgauge.errors import ParseError
from dhgauge.evolution import Circuit, Gate, HamiltonianSpec
from dhgauge.pauli import PauliSum, all_strings, string_matrix

from conftest import bell_circuit, taylor_exp

H2 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def test_hadamard_conjugation():
    s = evolution.apply_gate(descriptor.init(1), Gate("H", [0]))
    assert np.allclose(H2.conj().T @ tensor.SZ @ H2, tensor.SX)
    assert tensor.max_norm(s.descriptor(0, "z") - tensor.SX) < 1e-15
    assert tensor.max_norm(s.descriptor(0, "x") - tensor.SZ) < 1e-15


def test_x_gate_flips_z():
    s = evolution.apply_gate(descriptor.init(1), Gate("X", [0]))
    assert np.array_equal(tensor.SX @ tensor.SZ @ tensor.SX, -tensor.SZ)
    assert tensor.max_norm(s.descriptor(0, "z") + tensor.SZ) < 1e-15


def test_identity_gate_leaves_state_unchanged():
    s0 = evolution.run_circuit(descriptor.init(2), bell_circuit())
    s1 = evolution.apply_gate(s0, Gate("I", [1]))
    assert np.array_equal(s0.descriptors, s1.descriptors)


def test_run_circuit_examples():
    s0 = descriptor.init(2)
    assert evolution.run_circuit(s0, Circuit(2)) is s0
    bell = evolution.run_circuit(s0, bell_circuit())
    psi = evolution.schrodinger_oracle(bell_circuit())
    for p, want in (("ZZ", 1.0), ("ZI", 0.0)):
        assert abs(np.vdot(psi, string_matrix(p) @ psi) - want) < 1e-12
        assert abs(descriptor.expectation(bell, p) - want) < 1e-12
    hh = evolution.run_circuit(s0, Circuit(2, [Gate("H", [0]), Gate("H", [0])]))
    assert np.max(np.abs(hh.descriptors - s0.descriptors)) < 1e-10


def test_update_rule_equals_current_frame_conjugation():
    s = evolution.run_circuit(descriptor.init(3), evolution.random_circuit(3, 12, 8))
    for g in evolution.random_circuit(3, 12, 9).ops:
        u = descriptor.substitute(s, g.pauli_sum(3))
        want = u.conj().T[None, None] @ s.descriptors @ u[None, None]
        got = evolution.apply_gate(s, g)
        assert np.max(np.abs(got.descriptors - want)) < 1e-12
        s = got


def test_deep_circuit_stays_accurate():
    c = evolution.random_circuit(3, 200, 0)
    s = evolution.run_circuit(descriptor.init(3), c)
    psi = evolution.schrodinger_oracle(c)
    assert descriptor.invariant_violations(s, tol=1e-10) == []
    for p in ("ZZZ", "XIY", "IZX"):
        assert abs(descriptor.expectation(s, p) - np.vdot(psi, string_matrix(p) @ psi)) < 1e-10


def test_gate_sequence_order_matters():
    # H then S differs from S then H: checks the current-frame composition.
    for ops in (["H", "S"], ["S", "H"], ["H", "T", "H"]):
        c = Circuit(1, [Gate(g, [0]) for g in ops])
        s = evolution.run_circuit(descriptor.init(1), c)
        psi = evolution.schrodinger_oracle(c)
        for p in "XYZ":
            assert abs(descriptor.expectation(s, p) - np.vdot(psi, string_matrix(p) @ psi)) < 1e-12


def test_tracked_unitary_matches_oracle():
    c = evolution.random_circuit(3, 15, 2)
    s = evolution.run_circuit(descriptor.init(3), c)
    psi = evolution.schrodinger_oracle(c)
    assert np.allclose(s.tracked_unitary[:, 0], psi, atol=1e-12)
    assert descriptor.invariant_violations(s) == []


def test_schrodinger_oracle_examples():
    assert np.array_equal(evolution.schrodinger_oracle(Circuit(1)), [1, 0])
    assert np.allclose(evolution.schrodinger_oracle(Circuit(1, [Gate("H", [0])])), [1 / math.sqrt(2)] * 2)
    psi = evolution.schrodinger_oracle(bell_circuit())
    full = np.kron(np.eye(2), np.eye(2))
    # matrix-vector product oracle
    u = evolution.CircuitMatrix = np.eye(4)
    u = np.kron(H2, np.eye(2))
    cnot = Gate("CNOT", [0, 1]).matrix()
    e0 = full[:, 0]
    assert np.allclose(cnot @ u @ e0, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], atol=1e-15)
    assert np.allclose(psi, cnot @ u @ e0, atol=1e-15)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


def test_schrodinger_oracle_reversed_targets():
    c = Circuit(2, [Gate("X", [1]), Gate("CNOT", [1, 0])])
    assert np.allclose(evolution.schrodinger_oracle(c), [0, 0, 0, 1])


def test_random_circuits_against_oracle():
    for seed in range(20):
        c = evolution.random_circuit(3, 20, seed)
        s = evolution.run_circuit(descriptor.init(3), c)
        psi = evolution.schrodinger_oracle(c)
        for p in all_strings(3):
            assert abs(descriptor.expectation(s, p) - np.vdot(psi, string_matrix(p) @ psi)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10_000))
def test_locality_of_every_gate(n, seed):
    c = evolution.random_circuit(n, 20, seed)
    s = descriptor.init(n)
    for g in c.ops:
        nxt = evolution.apply_gate(s, g, conjugate_all=True)
        for q in range(n):
            if q not in g.targets:
                assert np.max(np.abs(nxt.descriptors[q] - s.descriptors[q])) < 1e-12
        fast = evolution.apply_gate(s, g)
        for q in range(n):
            if q not in g.targets:
                assert np.array_equal(fast.descriptors[q], s.descriptors[q])
            else:
                assert np.array_equal(fast.descriptors[q], nxt.descriptors[q])
        s = fast


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_algebra_preserved(n, seed):
    s = evolution.run_circuit(descriptor.init(n), evolution.random_circuit(n, 20, seed))
    assert descriptor.invariant_violations(s) == []


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CNOT", [0])
    with pytest.raises(ValueError):
        Gate("CNOT", [1, 1])
    with pytest.raises(ValueError):
        Gate("RX", [0])
    with pytest.raises(ValueError):
        Gate("FOO", [0])
    with pytest.raises(ValueError):
        Gate("CUSTOM", [0], custom_matrix=2 * np.eye(2))
    with pytest.raises(ValueError):
        Circuit(2, [Gate("H", [2])])
    for name in evolution.GATE_ARITY:
        k = evolution.GATE_ARITY[name]
        g = Gate(name, list(range(k)), [0.3] * evolution.PARAM_COUNT.get(name, 0))
        assert tensor.is_unitary(g.matrix())


def test_custom_gate_matches_builtin():
    c1 = Circuit(2, [Gate("CUSTOM", [1, 0], custom_matrix=Gate("CNOT", [0, 1]).matrix())])
    c2 = Circuit(2, [Gate("CNOT", [1, 0])])
    init = evolution.run_circuit(descriptor.init(2), Circuit(2, [Gate("H", [1])]))
    a = evolution.run_circuit(init, c1)
    b = evolution.run_circuit(init, c2)
    assert np.max(np.abs(a.descriptors - b.descriptors)) < 1e-14


def test_rotation_conventions():
    s = evolution.apply_gate(descriptor.init(1), Gate("RX", [0], [0.5]))
    # |psi> = RX(0.5)|0>: <Z> = cos 0.5, <Y> = -sin 0.5
    assert descriptor.expectation(s, "Z") == pytest.approx(math.cos(0.5))
    assert descriptor.expectation(s, "Y") == pytest.approx(-math.sin(0.5))


# -- Hamiltonian flow ----------------------------------------------------

def finite_difference_error(orientation, delta=1e-5):
    h = HamiltonianSpec(PauliSum({"Z": 0.5}))  # omega = 1
    s0 = evolution.apply_gate(descriptor.init(1), Gate("RY", [0], [0.8]))
    t = 0.37
    plus = evolution.evolve_hamiltonian(s0, h, t + delta, orientation)
    minus = evolution.evolve_hamiltonian(s0, h, t - delta, orientation)
    now = evolution.evolve_hamiltonian(s0, h, t, orientation)
    # H is a functional of the current descriptors: H(X(t)) = 0.5 * X_z(t)
    hm = descriptor.substitute(now, h.terms)
    worst = 0.0
    for a in range(3):
        fd = (plus.descriptors[0, a] - minus.descriptors[0, a]) / (2 * delta)
        x = now.descriptors[0, a]
        worst = max(worst, tensor.max_norm(fd - (-1j) * (hm @ x - x @ hm)))
    return worst


def test_flow_satisfies_heisenberg_equation():
    assert finite_difference_error(evolution.HEISENBERG_ORIENTATION) < 1e-9


def test_flipped_orientation_fails():
    assert finite_difference_error(-evolution.HEISENBERG_ORIENTATION) > 1e-2


def test_zero_hamiltonian_is_identity():
    s = evolution.run_circuit(descriptor.init(2), bell_circuit())
    out = evolution.evolve_hamiltonian(s, HamiltonianSpec(PauliSum.zero(2)), 3.0)
    assert np.array_equal(out.descriptors, s.descriptors)


def test_flow_against_mat_exp_oracle():
    h = HamiltonianSpec(PauliSum({"X": math.pi / 4}))
    s = evolution.evolve_hamiltonian(descriptor.init(1), h, 1.0)
    u = taylor_exp(1j * evolution.HEISENBERG_ORIENTATION * (math.pi / 4) * tensor.SX)
    for a, p in enumerate((tensor.SX, tensor.SY, tensor.SZ)):
        assert tensor.max_norm(s.descriptors[0, a] - u.conj().T @ p @ u) < 1e-10
    # rotation by pi/2 about x takes z to -+y
    assert tensor.max_norm(s.descriptors[0, 2] + tensor.SY) < 1e-10


def test_flow_composition():
    h = HamiltonianSpec(PauliSum({"ZZI": 0.7, "XIX": -0.4, "IYI": 0.3}))
    s = evolution.run_circuit(descriptor.init(3), evolution.random_circuit(3, 10, 4))
    once = evolution.evolve_hamiltonian(s, h, 1.3)
    twice = evolution.evolve_hamiltonian(evolution.evolve_hamiltonian(s, h, 0.5), h, 0.8)
    assert np.max(np.abs(once.descriptors - twice.descriptors)) < 1e-9


def test_flow_pauli_backend_matches_dense():
    h = HamiltonianSpec(PauliSum({"ZZ": 0.7, "XI": 0.4}))
    c = bell_circuit()
    dense = evolution.evolve_hamiltonian(evolution.run_circuit(descriptor.init(2), c), h, 0.9)
    ps = evolution.evolve_hamiltonian(evolution.run_circuit(descriptor.init(2, "pauli-sum"), c), h, 0.9)
    assert ps.backend == "pauli-sum"
    assert np.max(np.abs(descriptor.descriptor_matrices(ps) - dense.descriptors)) < 1e-10


def test_non_hermitian_hamiltonian_rejected():
    with pytest.raises(ValueError):
        HamiltonianSpec(PauliSum({"Z": 1j}))
    with pytest.raises(ValueError):
        evolution.evolve_hamiltonian(descriptor.init(1), PauliSum({"Z": 1j}), 1.0)


# -- gauged flow ---------------------------------------------------------

def _flow_error(h, fam, state0, t, dt):
    got = evolution.integrate_gauged_flow(state0, h, fam, t, dt)
    want = evolution.gauged_closed_form(state0, h, fam, t)
    return float(np.max(np.abs(got.descriptors - want.descriptors)))


def test_identity_family_reduces_to_plain_flow():
    h = HamiltonianSpec(PauliSum({"ZZ": 0.7, "XI": 0.4}))
    fam = gauge.GaugeFamily.constant(gauge.GaugeTransform.identity(2))
    s0 = descriptor.init(2)
    got = evolution.integrate_gauged_flow(s0, h, fam, 1.0, 1e-2)
    plain = evolution.evolve_hamiltonian(s0, h, 1.0)
    assert np.max(np.abs(got.descriptors - plain.descriptors)) < 1e-8


def test_constant_family_is_covariant():
    h = HamiltonianSpec(PauliSum({"ZZ": 0.7, "XI": 0.4}))
    g = gauge.random_stabilizing_unitary(2, 42)
    fam = gauge.GaugeFamily.constant(g)
    s0 = descriptor.init(2)
    got = evolution.integrate_gauged_flow(s0, h, fam, 1.0, 1e-2)
    want = gauge.apply_gauge(evolution.evolve_hamiltonian(s0, h, 1.0), g)
    assert np.max(np.abs(got.descriptors - want.descriptors)) < 1e-8


def test_z_generator_family_single_qubit():
    h = HamiltonianSpec(PauliSum({"Z": 0.5}))
    fam = gauge.GaugeFamily.exp_generator(PauliSum({"Z": 1.0}), 0.7)
    assert _flow_error(h, fam, descriptor.init(1), 1.0, 1e-3) <= 1e-6


def test_literal_connection_term_drifts():
    # dX'/dt = -i[H, X'] - i[V^dag dV/dt, X'] without the extra factor of -i
    h = HamiltonianSpec(PauliSum({"Z": 0.5}))
    fam = gauge.GaugeFamily.exp_generator(PauliSum({"Z": 1.0}), 0.7)
    s0 = descriptor.init(1)
    y = s0.descriptors.copy()
    dt, steps = 1e-3, 1000

    def rhs(tau, y):
        v = fam.matrix(tau)
        a = v.conj().T @ fam.derivative(tau)
        gen = h.terms.to_matrix() + a  # the functional equals H on the initial frame here
        return -1j * (gen @ y - y @ gen)

    for k in range(steps):
        tau = k * dt
        k1 = rhs(tau, y)
        k2 = rhs(tau + dt / 2, y + dt / 2 * k1)
        k3 = rhs(tau + dt / 2, y + dt / 2 * k2)
        k4 = rhs(tau + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    want = evolution.gauged_closed_form(s0, h, fam, 1.0).descriptors
    assert np.max(np.abs(y - want)) > 0.1


def test_integrator_is_fourth_order():
    h = HamiltonianSpec(PauliSum({"ZZ": 0.7, "XI": 0.4, "IY": -0.3}))
    fam = gauge.GaugeFamily.exp_generator(PauliSum({"ZI": 1.0, "IZ": 0.5, "ZZ": -0.8}), 1.3)
    s0 = descriptor.init(2)
    ratio = _flow_error(h, fam, s0, 1.0, 0.1) / _flow_error(h, fam, s0, 1.0, 0.05)
    assert 8 <= ratio <= 32


def test_gauged_flow_errors():
    h = HamiltonianSpec(PauliSum({"Z": 0.5}))
    fam = gauge.GaugeFamily.exp_generator(PauliSum({"Z": 1.0}), 0.7)
    with pytest.raises(ValueError):
        evolution.integrate_gauged_flow(descriptor.init(1), h, fam, 1.0, 0.0)
    with pytest.raises(ValueError):
        gauge.GaugeFamily.exp_generator(PauliSum({"X": 1.0}), 0.7)


# -- JSON -----------------------------------------------------------------

def test_circuit_json_round_trip():
    doc = {"qubits": 2, "ops": [{"gate": "H", "targets": [0]},
                                {"gate": "RZ", "targets": [1], "params": [0.5]},
                                {"gate": "CNOT", "targets": [0, 1]}]}
    c = evolution.circuit_from_json(doc)
    assert c.ops[1].params == (0.5,)
    again = evolution.circuit_from_json(evolution.circuit_to_json(c))
    assert again == c


@pytest.mark.parametrize("doc", [
    [], {"ops": []}, {"qubits": 1, "ops": [{"targets": [0]}]},
    {"qubits": 1, "ops": [{"gate": "CNOT", "targets": [0, 1]}]},
    {"qubits": 1, "ops": [{"gate": "RX", "targets": [0]}]},
])
def test_circuit_json_errors(doc):
    with pytest.raises(ParseError):
        evolution.circuit_from_json(doc)


def test_hamiltonian_json():
    h = evolution.hamiltonian_from_json({"terms": [{"pauli": "ZZI", "coeff": 0.7}]})
    assert h.n == 3 and h.terms.terms == {"ZZI": 0.7}
    with pytest.raises(ParseError):
        evolution.hamiltonian_from_json({"terms": [{"pauli": "Z", "coeff": [0, 1]}]})
