"""Two-qubit gate synthesis from the recoupled exchange interaction.

The primitive is the exchange gate U_phi = exp(-i phi (XX + YY + ZZ)) on a
qubit pair, approximated physically by repeated super-cycles whose
free-evolution time tau is calibrated so that the accumulated zeroth-order
(or second-order corrected) exchange phase equals phi.

Everything else is built from the fixed block U_{pi/8} (a square root of
Swap up to phase) plus perfect single-qubit rotations:

* ``swap``      -- two blocks, no dressing beyond a global phase.
* ``cnot``      -- two blocks with a Z pi-rotation between them (that pair
                   compiles to a controlled-Z up to local Z rotations) and
                   a Hadamard dressing of the target.
* ``cphase(a)`` -- four blocks: a target-Z rotation of angle -a/2
                   conjugated by two of the cnot realizations gives
                   exp(i a ZZ / 4), which outer Z rotations straighten
                   into diag(1, 1, 1, e^{i a}).

Every realization is checked against its ideal 4x4 target up to a global
phase at construction; a failed check is a bug, not a tolerance issue.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aht import RecouplingStrengths, j2_coefficient, solve_tau
from .model import SpinSystem
from .qstate import Operator, embed_local, pauli_matrix, rotation_matrix
from .sequences import ORIGINAL, Schedule, randomize_blocks, super_whh_schedule

BLOCK_PHI = np.pi / 8

_SWAP4 = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def ideal_uphi(phi: float) -> Operator:
    """exp(-i phi (XX+YY+ZZ)) = e^{i phi} (cos 2phi - i sin 2phi Swap)."""
    u = np.exp(1j * phi) * (
        np.cos(2 * phi) * np.eye(4, dtype=complex) - 1j * np.sin(2 * phi) * _SWAP4
    )
    return Operator(u, kind="unitary")


@dataclass(frozen=True)
class UPhiSpec:
    """Parameters of one synthesized exchange gate."""

    k: int
    l: int
    phi: float
    n_swhh: int
    variant: str = ORIGINAL
    calibration_order: int = 0

    def __post_init__(self):
        if self.n_swhh < 1:
            raise ValueError("n_swhh must be at least 1")
        if not 0 < self.phi <= np.pi:
            raise ValueError("phi must lie in (0, pi]")


def realize_uphi(
    system: SpinSystem, spec: UPhiSpec, rng: np.random.Generator | None = None
) -> Schedule:
    """Schedule of n_swhh dressed super-cycles realizing U_phi on (k, l)."""
    if system.couplings[spec.k, spec.l] == 0.0:
        raise ValueError(
            f"pair ({spec.k}, {spec.l}) is uncoupled; route the qubits together first"
        )
    strengths = j2_coefficient(system, spec.k, spec.l)
    tau = solve_tau(spec.phi, spec.n_swhh, strengths, order=spec.calibration_order)
    block = super_whh_schedule(spec.k, spec.l, tau)
    if spec.variant != ORIGINAL and rng is None:
        raise ValueError("randomized variants need an RNG stream")
    return randomize_blocks([block] * spec.n_swhh, spec.k, spec.l, spec.variant, rng)


def gate_tau(system: SpinSystem, spec: UPhiSpec) -> float:
    """Calibrated free-evolution time of the gate in ``spec``."""
    return solve_tau(
        spec.phi, spec.n_swhh, j2_coefficient(system, spec.k, spec.l), spec.calibration_order
    )


# ---------------------------------------------------------------------------
# decompositions into U_{pi/8} blocks and single-qubit rotations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingleQubitLayer:
    """R_axis(angle) = exp(-i sigma_axis angle / 2) on pair slot 0 or 1."""

    slot: int
    axis: str
    angle: float


@dataclass(frozen=True)
class UphiBlockLayer:
    """One U_{pi/8} block on the pair."""


Layer = SingleQubitLayer | UphiBlockLayer


@dataclass(frozen=True)
class GateRealization:
    """Layer sequence (execution order) compiling to ``target`` up to a
    global phase.  Slot 0 is the pair's first qubit; for the symmetric
    cphase gate the processor binds slot 0 to the smaller physical label."""

    kind: str
    layers: tuple
    target: np.ndarray
    phi_c: float | None = None

    @property
    def n_blocks(self) -> int:
        return sum(1 for ly in self.layers if isinstance(ly, UphiBlockLayer))


def _on(slot: int, u: np.ndarray) -> np.ndarray:
    return np.kron(u, np.eye(2)) if slot == 1 else np.kron(np.eye(2), u)


def compile_ideal(layers: Sequence[Layer]) -> np.ndarray:
    """4x4 matrix of a layer sequence with exact U_{pi/8} blocks."""
    a = ideal_uphi(BLOCK_PHI).entries
    u = np.eye(4, dtype=complex)
    for ly in layers:
        if isinstance(ly, UphiBlockLayer):
            u = a @ u
        else:
            u = _on(ly.slot, rotation_matrix(ly.axis, ly.angle)) @ u
    return u


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Operator distance minimized over a global phase."""
    tr = np.trace(v.conj().T @ u)
    ph = tr / abs(tr) if abs(tr) > 1e-14 else 1.0
    return float(np.linalg.norm(u - ph * v, 2))


def _sz(slot: int, angle: float) -> SingleQubitLayer:
    return SingleQubitLayer(slot, "z", angle)


def _hadamard_layers(slot: int) -> tuple:
    # H is proportional to Ry(pi/2) Rz(pi), rightmost first
    return (_sz(slot, np.pi), SingleQubitLayer(slot, "y", np.pi / 2))


def _cz_layers() -> tuple:
    """Controlled-Z: two blocks around a Z pi-rotation, Z dressing."""
    return (
        _sz(0, np.pi / 2),
        _sz(1, np.pi / 2),
        UphiBlockLayer(),
        _sz(0, np.pi),
        UphiBlockLayer(),
        _sz(1, np.pi),
    )


def _cnot_layers(control: int, target: int) -> tuple:
    return _hadamard_layers(target) + _cz_layers() + _hadamard_layers(target)


def _decompose_swap() -> GateRealization:
    layers = (UphiBlockLayer(), UphiBlockLayer())
    real = GateRealization("swap", layers, _SWAP4.copy())
    _assert_realization(real)
    return real


def _decompose_cnot() -> GateRealization:
    # control slot 0, target slot 1: |b1 b0> flips bit 1 when bit 0 is set
    target = np.array(
        [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
    )
    real = GateRealization("cnot", _cnot_layers(0, 1), target)
    _assert_realization(real)
    return real


def _decompose_cphase(phi_c: float) -> GateRealization:
    """diag(1,1,1,e^{i phi_c}) as a slot-0 Z rotation conjugated by two
    cnot realizations (target slot 0, so the dressing leads on slot 0)."""
    target = np.diag([1.0, 1.0, 1.0, np.exp(1j * phi_c)]).astype(complex)
    cnot10 = _cnot_layers(control=1, target=0)
    layers = (
        cnot10
        + (_sz(0, -phi_c / 2),)
        + cnot10
        + (_sz(0, phi_c / 2), _sz(1, phi_c / 2))
    )
    real = GateRealization("cphase", layers, target, phi_c=phi_c)
    _assert_realization(real)
    return real


def _decompose_uphi(phi: float) -> GateRealization:
    m = phi / BLOCK_PHI
    if abs(m - round(m)) > 1e-9 or round(m) < 1:
        raise ValueError(f"uphi angle {phi} is not a positive multiple of pi/8")
    layers = (UphiBlockLayer(),) * int(round(m))
    real = GateRealization("uphi", layers, ideal_uphi(phi).entries, phi_c=phi)
    _assert_realization(real)
    return real


def _assert_realization(real: GateRealization) -> None:
    dist = phase_distance(compile_ideal(real.layers), real.target)
    if dist > 1e-10:
        raise AssertionError(f"{real.kind} realization off target by {dist:.3e}")


_static_cache: dict = {}


def decompose_gate(kind: str, phi_c: float | None = None) -> GateRealization:
    """Realization of swap, cnot or cphase(phi_c) from U_{pi/8} blocks."""
    key = (kind, phi_c)
    if key in _static_cache:
        return _static_cache[key]
    if kind == "swap":
        real = _decompose_swap()
    elif kind == "cnot":
        real = _decompose_cnot()
    elif kind == "cphase":
        if phi_c is None:
            raise ValueError("cphase needs an angle")
        real = _decompose_cphase(float(phi_c))
    elif kind == "uphi":
        if phi_c is None:
            raise ValueError("uphi needs an angle")
        real = _decompose_uphi(float(phi_c))
    else:
        raise ValueError(f"unsupported gate kind {kind!r}")
    _static_cache[key] = real
    return real


# ---------------------------------------------------------------------------
# fidelity statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FidelityStat:
    mean: float
    stderr: float
    runs: int
    basis_states: int


def avg_gate_fidelity(
    system: SpinSystem,
    spec: UPhiSpec,
    target: Operator,
    runs: int,
    rng: np.random.Generator | None = None,
) -> FidelityStat:
    """Mean fidelity of the synthesized gate over all computational basis
    states of the register, repeated over independently dressed runs.

    The ideal reference acts as ``target`` on the pair and as identity on
    every spectator.  Compiling the schedule once per run and reading the
    diagonal of target^dag U is identical to executing both evolutions on
    each basis state separately.
    """
    from .sequences import schedule_unitary

    if runs < 1:
        raise ValueError("runs must be at least 1")
    t_full = embed_local(target, [spec.k, spec.l], system.n_q).entries
    run_means = np.empty(runs)
    for r in range(runs):
        sched = realize_uphi(system, spec, rng)
        u = schedule_unitary(sched, system).entries
        d = np.diag(t_full.conj().T @ u)
        run_means[r] = np.mean(np.abs(d) ** 2)
    mean = float(np.mean(run_means))
    stderr = float(np.std(run_means, ddof=1) / np.sqrt(runs)) if runs > 1 else 0.0
    return FidelityStat(mean=mean, stderr=stderr, runs=runs, basis_states=system.dim)
