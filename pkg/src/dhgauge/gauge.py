"""Quantum gauge transformations of descriptor states.

A gauge transform is a unitary ``V`` with ``V|0...0> = exp(-i theta)|0...0>``.
Conjugating every descriptor by ``V`` leaves all expectation values
unchanged, so states are compared through their reconstructed density
operator (:func:`canonical_form`).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from . import serial, tensor
from .descriptor import (
    DEFAULT_LIMITS,
    descriptor_matrices,
    initial_descriptor,
    reduced_density,
    to_dense,
    to_pauli_sum,
)
from .errors import CapExceededError, ParseError, StabilizerViolationError, WitnessError

STABILIZER_TOL = 1e-10
EQUIVALENCE_TOL = 1e-8
FAMILY_TOL = 1e-8


def stabilizer_residual(v, theta):
    """Max-norm of ``V|0> - exp(-i theta)|0>``."""
    col = np.array(v[:, 0], dtype=complex)
    col[0] -= np.exp(-1j * theta)
    return tensor.max_norm(col)


@dataclass(frozen=True)
class GaugeTransform:
    v: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v", tensor.as_matrix(self.v))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def n(self):
        return tensor.num_qubits(self.v.shape[0])

    def violations(self, tol=STABILIZER_TOL):
        out = []
        if not tensor.is_unitary(self.v, tol):
            out.append("not unitary")
        if stabilizer_residual(self.v, self.theta) > tol:
            out.append("does not fix |0...0> up to exp(-i theta)")
        return out

    def validate(self, tol=STABILIZER_TOL):
        bad = self.violations(tol)
        if bad:
            raise StabilizerViolationError("invalid gauge transform: " + ", ".join(bad))
        return self

    @classmethod
    def checked(cls, v, theta=None, tol=STABILIZER_TOL):
        """Build and validate; ``theta`` defaults to ``-arg V[0, 0]``."""
        v = tensor.as_matrix(v)
        if theta is None:
            theta = float(-np.angle(v[0, 0])) % (2 * math.pi)
        return cls(v, theta).validate(tol)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(1 << n, dtype=complex), 0.0)


def conjugation_distance(v1, v2):
    """Distance between the conjugation actions of two unitaries.

    Minimises ``max|v1 - e^{i phi} v2|`` over the global phase (phase
    taken from ``tr(v2^dagger v1)``).
    """
    v1, v2 = tensor.as_matrix(v1), tensor.as_matrix(v2)
    overlap = np.trace(v2.conj().T @ v1)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-12 else 1.0
    return tensor.max_norm(v1 - phase * v2)


class GaugeFamily:
    """A time-parametrised gauge ``V(t)``.

    Two kinds: ``constant`` (one :class:`GaugeTransform` for all t) and
    ``exp_generator`` with ``V(t) = exp(-i omega t G)``, ``G`` a real
    combination of strings over ``{I, Z}``.
    """

    def __init__(self, kind, transform=None, generator=None, omega=0.0):
        if kind == "constant":
            if transform is None:
                raise ValueError("constant family needs a transform")
            transform.validate()
        elif kind == "exp_generator":
            if generator is None:
                raise ValueError("exp_generator family needs a generator")
            if not generator.is_hermitian():
                raise StabilizerViolationError("gauge generator must have real coefficients")
            bad = [s for s, _ in generator if set(s) - {"I", "Z"}]
            if bad:
                raise StabilizerViolationError(
                    f"gauge generator strings {bad} are not diagonal (letters must be I/Z)"
                )
        else:
            raise ValueError(f"unknown gauge family kind {kind!r}")
        self.kind = kind
        self.transform = transform
        self.generator = generator
        self.omega = float(omega)
        self._gmat = generator.to_matrix().real.astype(complex) if generator is not None else None

    @classmethod
    def constant(cls, transform):
        return cls("constant", transform=transform)

    @classmethod
    def exp_generator(cls, generator, omega):
        return cls("exp_generator", generator=generator, omega=omega)

    @property
    def n(self):
        return self.transform.n if self.kind == "constant" else self.generator.n

    def matrix(self, t):
        if self.kind == "constant":
            return self.transform.v
        return tensor.mat_exp(-1j * self.omega * t * self._gmat)

    def derivative(self, t):
        if self.kind == "constant":
            return np.zeros_like(self.transform.v)
        return -1j * self.omega * self._gmat @ self.matrix(t)

    def at(self, t, tol=FAMILY_TOL):
        """``V(t)`` as a validated :class:`GaugeTransform`."""
        if self.kind == "constant":
            g = self.transform
        else:
            g = GaugeTransform(self.matrix(t), self.omega * t * self._gmat[0, 0].real)
        return g.validate(tol)

    def connection(self, t, tol=FAMILY_TOL):
        """Hermitian ``K(t) = -i V(t)^dagger dV/dt``; checks ``V(t)`` first."""
        v = self.at(t, tol).v
        return -1j * v.conj().T @ self.derivative(t)


def random_stabilizing_unitary(n, seed, dense_cap=DEFAULT_LIMITS.dense_cap):
    """Phase ``exp(-i theta)`` on ``|0...0>`` and a Haar unitary on its complement."""
    if n > dense_cap:
        raise CapExceededError(f"{n} qubits exceeds dense cap {dense_cap}")
    rng = np.random.default_rng(seed)
    theta = float(rng.uniform(0.0, 2 * math.pi))
    dim = 1 << n
    v = np.zeros((dim, dim), dtype=complex)
    v[0, 0] = np.exp(-1j * theta)
    if dim - 1 >= 2:
        v[1:, 1:] = unitary_group.rvs(dim - 1, random_state=rng)
    else:
        v[1, 1] = np.exp(1j * rng.uniform(0.0, 2 * math.pi))
    return GaugeTransform(v, theta).validate()


def apply_gauge(state, g):
    """Conjugate every descriptor by ``g.v``; tracked ``W`` becomes ``W V``."""
    if g.v.shape != (state.dim, state.dim):
        raise ValueError(f"gauge acts on dimension {g.v.shape[0]}, state has {state.dim}")
    g.validate()
    dense = to_dense(state)
    v = g.v
    d = v.conj().T[None, None] @ dense.descriptors @ v[None, None]
    tracked = state.tracked_unitary
    if tracked is not None:
        tracked = tracked @ v
    out = dense.with_(descriptors=d, tracked_unitary=tracked)
    return to_pauli_sum(out) if state.backend == "pauli-sum" else out


def canonical_form(state):
    """Full density operator rebuilt from descriptor expectations."""
    return reduced_density(state, range(state.n))


def canonical_distance(a, b):
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n} qubits")
    return tensor.max_norm(canonical_form(a) - canonical_form(b))


def gauge_equivalent(a, b, tol=EQUIVALENCE_TOL):
    return canonical_distance(a, b) < tol


def _tracking_consistent(state, tol):
    w = state.tracked_unitary
    d = descriptor_matrices(state)
    for q in range(state.n):
        for a in range(3):
            ref = w.conj().T @ initial_descriptor(state.n, q, a, "dense") @ w
            if tensor.max_norm(ref - d[q, a]) > tol:
                return False
    return True


def recover_witness(a, b, tol=EQUIVALENCE_TOL):
    """Gauge transform ``V = W_a^dagger W_b`` taking ``a`` to ``b``.

    Raises :class:`WitnessError` with reason ``"untracked"`` when either
    state lacks a (consistent) tracked unitary, or ``"inequivalent"``.
    """
    if a.tracked_unitary is None or b.tracked_unitary is None:
        raise WitnessError("untracked", "both states need a tracked unitary")
    if not (_tracking_consistent(a, tol) and _tracking_consistent(b, tol)):
        raise WitnessError("untracked", "descriptors disagree with the tracked unitary")
    if not gauge_equivalent(a, b, tol):
        raise WitnessError("inequivalent", "states have different expectation values")
    v = a.tracked_unitary.conj().T @ b.tracked_unitary
    theta = float(-np.angle(v[0, 0])) % (2 * math.pi)
    g = GaugeTransform(v, theta)
    if g.violations(tol):
        raise WitnessError("inequivalent", "witness does not fix the reference vector")
    return g


# -- JSON -----------------------------------------------------------------

def gauge_from_json(doc, n, seed_override=None, dense_cap=DEFAULT_LIMITS.dense_cap):
    """Parse a gauge document into a :class:`GaugeFamily`.

    ``random_stabilizing`` and ``explicit`` documents give constant
    families; ``exp_generator`` gives a time-dependent one.
    """
    if not isinstance(doc, dict) or "type" not in doc:
        raise ParseError("gauge must be an object with a 'type'")
    kind = doc["type"]
    if kind == "identity":
        return GaugeFamily.constant(GaugeTransform.identity(n))
    if kind == "random_stabilizing":
        seed = doc.get("seed") if seed_override is None else seed_override
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ParseError("random_stabilizing gauge requires an integer 'seed'")
        return GaugeFamily.constant(random_stabilizing_unitary(n, seed, dense_cap))
    if kind == "explicit":
        v = serial.decode_matrix(doc.get("matrix"))
        if v.shape != (1 << n, 1 << n):
            raise ParseError(f"explicit gauge matrix has shape {v.shape}, expected {1 << n}")
        theta = doc.get("theta")
        if theta is not None and not isinstance(theta, (int, float)):
            raise ParseError("'theta' must be a real number")
        return GaugeFamily.constant(GaugeTransform.checked(v, theta))
    if kind == "exp_generator":
        gen = serial.decode_pauli_sum(doc.get("generator"), n, real=True)
        omega = doc.get("omega", 1.0)
        if not isinstance(omega, (int, float)):
            raise ParseError("'omega' must be a real number")
        return GaugeFamily.exp_generator(gen, omega)
    raise ParseError(f"unknown gauge type {kind!r}")


def transform_to_json(g):
    return {
        "version": serial.FORMAT_VERSION,
        "type": "explicit",
        "matrix": serial.encode_matrix(g.v),
        "theta": g.theta,
    }

