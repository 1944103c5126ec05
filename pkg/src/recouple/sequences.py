"""Pulse schedules: WHH-4 and the recoupling super-cycle, random Pauli
frames with pair symmetrization, toggled-frame extraction and execution.

Pulse conventions
-----------------
* ``broadband_half_pi`` with axis ``a`` and sign ``s`` applies
  ``exp(-i s sigma_a pi/4)`` to every qubit simultaneously; sign -1 is the
  inverse rotation (the "bar" pulse).
* ``selective_pi`` applies the bare Pauli operator on one qubit (a pi pulse
  up to an absorbed global phase), instantaneously and perfectly.
* ``selective_half_pi`` applies ``exp(-i s sigma_a pi/4)`` on one qubit.
* ``pauli_frame`` applies a full Pauli string in a single step.

The WHH-4 cycle is four broadband half-pi pulses at times tau, 2tau, 4tau,
5tau inside six free-evolution intervals (cycle time 6 tau).  Its toggled
Hamiltonian sequence is palindromic, so the time average vanishes at zeroth
order and all odd orders vanish.

The recoupling super-cycle for a pair (k, l) runs six WHH-4 blocks whose
free evolutions are conjugated by selective pi-pulse pairs, in block order

    zz, xy, yx, yx, xy, zz        (36 intervals, cycle time 36 tau)

where e.g. "xy" means sigma_x on the lower-labeled qubit of the pair and
sigma_y on the other.  The conjugating pulses sandwich every free interval,
so interval j evolves under the double-toggled Hamiltonian; the palindromic
block order cancels all odd orders and leaves the isotropic exchange
coupling (2 J_kl / 9)(XX + YY + ZZ) at zeroth order.  The mirrored second
half realizes the reversed-pulse blocks; with the Zeeman term already
suppressed the two halves generate identical toggled sequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .aht import PiecewiseHamiltonian
from .model import SpinSystem, dipole_hamiltonian
from .qstate import (
    AXES,
    Operator,
    PropagatorCache,
    StateVector,
    apply_all_qubits,
    apply_pauli_string_arr,
    apply_single_qubit,
    pauli_matrix,
    propagator,
    rotation_matrix,
)

ORIGINAL = "original"
RANDOMIZED = "randomized"
RANDOMIZED_SYMMETRIZED = "randomized_symmetrized"
SCHEME_VARIANTS = (ORIGINAL, RANDOMIZED, RANDOMIZED_SYMMETRIZED)

#: block order of the recoupling super-cycle: (axis on lower qubit, axis on
#: higher qubit) per WHH-4 block, first half then its mirror.
SUPER_BLOCK_ORDER = (("z", "z"), ("x", "y"), ("y", "x"), ("y", "x"), ("x", "y"), ("z", "z"))


@dataclass(frozen=True)
class Pulse:
    kind: str
    axis: str | None = None
    sign: int = 1
    qubit: int | None = None
    frame: tuple[str, ...] | None = None

    def label(self) -> str:
        if self.kind == "broadband_half_pi":
            return f"pulse broadband_half_pi {'+' if self.sign > 0 else '-'}{self.axis}"
        if self.kind == "selective_pi":
            return f"pulse selective_pi q{self.qubit} {self.axis}"
        if self.kind == "selective_half_pi":
            return f"pulse selective_half_pi q{self.qubit} {'+' if self.sign > 0 else '-'}{self.axis}"
        if self.kind == "pauli_frame":
            return "pulse pauli_frame " + "".join(self.frame)
        raise ValueError(f"unknown pulse kind {self.kind!r}")


def broadband_half_pi(axis: str, sign: int = 1) -> Pulse:
    return Pulse("broadband_half_pi", axis=axis, sign=sign)


def selective_pi(qubit: int, axis: str) -> Pulse:
    return Pulse("selective_pi", axis=axis, qubit=qubit)


def selective_half_pi(qubit: int, axis: str, sign: int = 1) -> Pulse:
    return Pulse("selective_half_pi", axis=axis, qubit=qubit, sign=sign)


def pauli_frame(frame: Sequence[str]) -> Pulse:
    return Pulse("pauli_frame", frame=tuple(frame))


@dataclass(frozen=True)
class Free:
    tau: float

    def label(self) -> str:
        return f"free {self.tau!r}"


@dataclass(frozen=True)
class Schedule:
    """Ordered pulses and free-evolution intervals."""

    items: tuple

    @property
    def total_duration(self) -> float:
        return sum(it.tau for it in self.items if isinstance(it, Free))

    @property
    def n_free(self) -> int:
        return sum(1 for it in self.items if isinstance(it, Free))

    def to_text(self) -> str:
        """Line-oriented dump, one pulse or interval per line."""
        return "\n".join(it.label() for it in self.items) + "\n"

    def __add__(self, other: "Schedule") -> "Schedule":
        return Schedule(self.items + other.items)


def concat(schedules: Iterable[Schedule]) -> Schedule:
    items: tuple = ()
    for s in schedules:
        items = items + s.items
    return Schedule(items)


def whh4_schedule(tau: float, toggle: tuple[Pulse, Pulse] | None = None) -> Schedule:
    """One WHH-4 cycle.

    With ``toggle`` given (a pair of selective pi pulses), every free
    interval is sandwiched by the pair, so the block's free evolutions run
    under the conjugated Hamiltonian while the broadband pulse pattern is
    unchanged.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")

    def free_block() -> tuple:
        if toggle is None:
            return (Free(tau),)
        return (toggle[0], toggle[1], Free(tau), toggle[0], toggle[1])

    items: tuple = ()
    items += free_block()
    items += (broadband_half_pi("x", +1),)
    items += free_block()
    items += (broadband_half_pi("y", -1),)
    items += free_block()
    items += free_block()
    items += (broadband_half_pi("y", +1),)
    items += free_block()
    items += (broadband_half_pi("x", -1),)
    items += free_block()
    return Schedule(items)


def super_whh_schedule(k: int, l: int, tau: float) -> Schedule:
    """36-interval recoupling super-cycle for the pair (k, l).

    The lower-labeled qubit takes the sigma_x role in the xy block.
    """
    if k == l:
        raise ValueError("recoupled pair must be two distinct qubits")
    p, q = (k, l) if k < l else (l, k)
    blocks = []
    for ax_p, ax_q in SUPER_BLOCK_ORDER:
        blocks.append(whh4_schedule(tau, toggle=(selective_pi(p, ax_p), selective_pi(q, ax_q))))
    return concat(blocks)


@dataclass(frozen=True)
class BlockWrapper:
    """Random dressing of one super-cycle: a Pauli frame (identity on the
    recoupled pair) and, for the symmetrized variant, a shared pair
    rotation axis."""

    frame: tuple[str, ...]
    alpha: str | None


def draw_block_wrappers(
    rng: np.random.Generator, n_q: int, k: int, l: int, variant: str, n_blocks: int
) -> list[BlockWrapper]:
    """Deterministic draw order: per block, first the frame axes for all
    qubits (entries for k and l forced to identity), then the
    symmetrization axis when applicable."""
    if variant not in SCHEME_VARIANTS:
        raise ValueError(f"unknown scheme variant {variant!r}")
    wrappers = []
    for _ in range(n_blocks):
        if variant == ORIGINAL:
            wrappers.append(BlockWrapper(frame=("i",) * n_q, alpha=None))
            continue
        draws = rng.integers(0, 4, size=n_q)
        draws[k] = draws[l] = 0
        frame = tuple(AXES[d] for d in draws)
        alpha = None
        if variant == RANDOMIZED_SYMMETRIZED:
            alpha = "xyz"[rng.integers(0, 3)]
        wrappers.append(BlockWrapper(frame=frame, alpha=alpha))
    return wrappers


def wrap_block(block: Schedule, k: int, l: int, wrapper: BlockWrapper) -> Schedule:
    """Dress one super-cycle: frame before and after (frames are
    involutions), pair rotations before and inverse after."""
    pre: tuple = ()
    post: tuple = ()
    if any(a != "i" for a in wrapper.frame):
        pre += (pauli_frame(wrapper.frame),)
        post = (pauli_frame(wrapper.frame),) + post
    if wrapper.alpha is not None:
        pre += (selective_half_pi(k, wrapper.alpha, +1), selective_half_pi(l, wrapper.alpha, +1))
        post = (selective_half_pi(k, wrapper.alpha, -1), selective_half_pi(l, wrapper.alpha, -1)) + post
    return Schedule(pre + block.items + post)


def randomize_blocks(
    blocks: Sequence[Schedule], k: int, l: int, variant: str, rng: np.random.Generator
) -> Schedule:
    """Concatenate super-cycles under the given decoupling variant."""
    if not blocks:
        raise ValueError("empty block list")
    if variant == ORIGINAL:
        return concat(blocks)
    wrappers = draw_block_wrappers(rng, _block_n_q(blocks[0]), k, l, variant, len(blocks))
    return concat(wrap_block(b, k, l, w) for b, w in zip(blocks, wrappers))


def _block_n_q(block: Schedule) -> int:
    n = 0
    for it in block.items:
        if isinstance(it, Pulse):
            if it.qubit is not None:
                n = max(n, it.qubit + 1)
            if it.frame is not None:
                n = max(n, len(it.frame))
    return n


# ---------------------------------------------------------------------------
# application and compilation
# ---------------------------------------------------------------------------

def apply_pulse_arr(arr: np.ndarray, n_q: int, pulse: Pulse) -> np.ndarray:
    """Apply one pulse to the leading axis of an amplitude array."""
    if pulse.kind == "broadband_half_pi":
        u = rotation_matrix(pulse.axis, pulse.sign * np.pi / 2)
        return apply_all_qubits(arr, n_q, u)
    if pulse.kind == "selective_pi":
        return apply_pauli_string_arr(arr, n_q, {pulse.qubit: pulse.axis})
    if pulse.kind == "selective_half_pi":
        u = rotation_matrix(pulse.axis, pulse.sign * np.pi / 2)
        return apply_single_qubit(arr, n_q, pulse.qubit, u)
    if pulse.kind == "pauli_frame":
        assignments = {q: a for q, a in enumerate(pulse.frame) if a != "i"}
        if not assignments:
            return arr
        return apply_pauli_string_arr(arr, n_q, assignments)
    raise ValueError(f"unknown pulse kind {pulse.kind!r}")


def pulse_operator(pulse: Pulse, n_q: int) -> Operator:
    u = apply_pulse_arr(np.eye(2**n_q, dtype=complex), n_q, pulse)
    return Operator(u, kind="unitary")


def execute_schedule(
    state: StateVector,
    schedule: Schedule,
    system: SpinSystem,
    cache: PropagatorCache | None = None,
) -> StateVector:
    """Run a schedule: instantaneous pulses and dipolar free evolution."""
    if state.dim != system.dim:
        raise ValueError(f"state dim {state.dim} vs system dim {system.dim}")
    h = dipole_hamiltonian(system)
    amp = state.amplitudes
    applied = state.applied
    for it in schedule.items:
        if isinstance(it, Free):
            u = propagator(h, it.tau, cache)
            amp = u.entries @ amp
        else:
            amp = apply_pulse_arr(amp, system.n_q, it)
        applied += 1
        if applied % 1000 == 0:
            amp = amp / np.linalg.norm(amp)
    return StateVector(state.n_q, amp, applied)


def schedule_unitary(
    schedule: Schedule, system: SpinSystem, cache: PropagatorCache | None = None
) -> Operator:
    """Compile a schedule into its total unitary."""
    h = dipole_hamiltonian(system)
    u = np.eye(system.dim, dtype=complex)
    for it in schedule.items:
        if isinstance(it, Free):
            u = propagator(h, it.tau, cache).entries @ u
        else:
            u = apply_pulse_arr(u, system.n_q, it)
    return Operator(u, kind="unitary")


def toggled_sequence(schedule: Schedule, h: Operator) -> PiecewiseHamiltonian:
    """Interaction-picture Hamiltonians of a schedule.

    Segment j carries U_j^dag h U_j where U_j is the product of all pulses
    preceding free interval j.
    """
    n_q = h.n_qubits
    u = np.eye(h.dim, dtype=complex)
    segments = []
    for it in schedule.items:
        if isinstance(it, Free):
            segments.append((Operator(u.conj().T @ h.entries @ u, kind="hermitian"), it.tau))
        else:
            u = apply_pulse_arr(u, n_q, it)
    return PiecewiseHamiltonian(tuple(segments))
