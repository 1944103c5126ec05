"""Pulse-level simulator for selective recoupling of dipole-coupled spin
qubits embedded in stochastic dynamical decoupling."""

from .aht import (
    AhtTerms,
    BoundInput,
    PiecewiseHamiltonian,
    RecouplingStrengths,
    aht_terms,
    extract_pauli_coefficient,
    fidelity_lower_bound,
    j2_coefficient,
    solve_tau,
)
from .analysis import (
    ExperimentConfig,
    FitResult,
    HusimiGrid,
    RunResult,
    emit_results,
    fit_decay,
    husimi_grid,
    run_experiment,
)
from .gates import (
    FidelityStat,
    GateRealization,
    UPhiSpec,
    avg_gate_fidelity,
    decompose_gate,
    ideal_uphi,
    realize_uphi,
)
from .model import (
    LatticeSpec,
    SpinSystem,
    build_couplings,
    dipole_hamiltonian,
    zeeman_hamiltonian,
)
from .processor import (
    ExecutionTrace,
    GateEvent,
    Processor,
    QubitMap,
    ideal_execute,
    execute_circuit,
    relabel,
    route_pair,
    single_qubit,
    to_logical_order,
    two_qubit,
)
from .qstate import (
    Operator,
    PropagatorCache,
    StateVector,
    apply_unitary,
    basis_state,
    embed_local,
    pauli_string,
    propagator,
    state_fidelity,
)
from .sawtooth import SawtoothParams, exact_step, gate_count, initial_state, sawtooth_circuit
from .sequences import (
    ORIGINAL,
    RANDOMIZED,
    RANDOMIZED_SYMMETRIZED,
    Pulse,
    Schedule,
    execute_schedule,
    randomize_blocks,
    schedule_unitary,
    super_whh_schedule,
    toggled_sequence,
    whh4_schedule,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
