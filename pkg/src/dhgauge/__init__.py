"""Heisenberg-picture (Deutsch-Hayden) qubit simulator with a gauge engine.

The state of each qubit is a triple of operators evolved by conjugation,
expectations are taken in the fixed vector ``|0...0>``, and unitaries
fixing that vector act as gauge transformations.  A lattice
Aharonov-Bohm model sits alongside as the electromagnetic analogue.
"""

from .descriptor import (
    DEFAULT_LIMITS,
    DescriptorState,
    Limits,
    expectation,
    footprint,
    init,
    reduced_density,
    to_dense,
    to_pauli_sum,
)
from .evolution import (
    Circuit,
    Gate,
    HamiltonianSpec,
    apply_gate,
    evolve_hamiltonian,
    integrate_gauged_flow,
    run_circuit,
    schrodinger_oracle,
)
from .gauge import (
    GaugeFamily,
    GaugeTransform,
    apply_gauge,
    canonical_form,
    gauge_equivalent,
    random_stabilizing_unitary,
    recover_witness,
)
from .pauli import PauliSum

__version__ = "0.1.0"
