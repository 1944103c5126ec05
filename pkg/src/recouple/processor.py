"""Logical-circuit execution on a coupling-constrained register.

Circuits are lists of :class:`GateEvent`: perfect single-qubit unitaries,
named two-qubit gates, and relabel events that permute the logical-to-
physical map without touching the state.  Two-qubit gates run only between
horizontally or vertically coupled neighbors; on the 3x3 grid a
non-adjacent pair is first brought together by a deterministic chain of
Swap gates, each realized (and charged) as two U_{pi/8} blocks.

Routing strategy: if the pair shares a column, the lower qubit moves up
until adjacent; otherwise the lower qubit first moves up to the other's
row, then the left one moves right until adjacent.  Deliberately simple
and not swap-optimal; logical semantics are routing-invariant.

The noisy executor replaces every U_{pi/8} block by its pulse-level
realization (n_swhh dressed super-cycles, precompiled per pair); the ideal
executor runs the identical control flow with exact blocks and is fully
deterministic.  The exchange block is symmetric under qubit exchange, so
block orientation only enters through the super-cycle pulse assignment,
which always gives the sigma_x role to the smaller physical label;
likewise the cphase dressing leads on the smaller physical label.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .gates import (
    BLOCK_PHI,
    GateRealization,
    SingleQubitLayer,
    UPhiSpec,
    UphiBlockLayer,
    decompose_gate,
    gate_tau,
    ideal_uphi,
)
from .model import GRID3X3, LatticeSpec, SpinSystem, grid_position
from .qstate import (
    PropagatorCache,
    StateVector,
    apply_pauli_string_arr,
    apply_single_qubit,
    rotation_matrix,
)
from .sequences import ORIGINAL, draw_block_wrappers, schedule_unitary, super_whh_schedule


@dataclass(frozen=True)
class QubitMap:
    """Bijective logical -> physical assignment."""

    log_to_phys: tuple

    def __post_init__(self):
        n = len(self.log_to_phys)
        if sorted(self.log_to_phys) != list(range(n)):
            raise ValueError(f"not a permutation: {self.log_to_phys}")

    @classmethod
    def identity(cls, n_q: int) -> "QubitMap":
        return cls(tuple(range(n_q)))

    @property
    def n_q(self) -> int:
        return len(self.log_to_phys)

    def physical(self, logical: int) -> int:
        return self.log_to_phys[logical]

    def swap_physical(self, p: int, q: int) -> "QubitMap":
        """Exchange the contents of two physical sites."""
        trade = {p: q, q: p}
        return QubitMap(tuple(trade.get(x, x) for x in self.log_to_phys))

    def relabel(self, perm: Sequence[int]) -> "QubitMap":
        """New logical i refers to what logical perm[i] referred to."""
        return QubitMap(tuple(self.log_to_phys[perm[i]] for i in range(self.n_q)))


@dataclass(frozen=True)
class GateEvent:
    kind: str
    logical: int | None = None
    u: np.ndarray | None = None
    gate: str | None = None
    pair: tuple | None = None
    phi: float | None = None
    perm: tuple | None = None


def single_qubit(u: np.ndarray, logical: int) -> GateEvent:
    return GateEvent("single", logical=logical, u=np.asarray(u, dtype=complex))


def two_qubit(gate: str, a: int, b: int, phi: float | None = None) -> GateEvent:
    if a == b:
        raise ValueError("two-qubit gate needs distinct qubits")
    return GateEvent("two", gate=gate, pair=(a, b), phi=phi)


def relabel(perm: Sequence[int]) -> GateEvent:
    return GateEvent("relabel", perm=tuple(perm))


@dataclass
class ExecutionTrace:
    events: int = 0
    swaps: int = 0
    uphi_blocks: int = 0

    def as_dict(self) -> dict:
        return {"events": self.events, "swaps": self.swaps, "uphi_blocks": self.uphi_blocks}


def _grid_adjacent(p: int, q: int) -> bool:
    (rp, cp), (rq, cq) = grid_position(p), grid_position(q)
    return abs(rp - rq) + abs(cp - cq) == 1


def route_pair(
    qmap: QubitMap, a: int, b: int, lattice: LatticeSpec
) -> tuple[list, QubitMap]:
    """Swap chain making logical a and b horizontal/vertical neighbors.

    Returns the emitted swaps as physical pairs plus the updated map; every
    swap is between coupled horizontal/vertical neighbors.
    """
    if lattice.kind != GRID3X3:
        raise ValueError("routing is defined on the 3x3 grid")
    if a == b:
        raise ValueError("cannot route a qubit to itself")
    swaps: list = []
    pa, pb = qmap.physical(a), qmap.physical(b)
    while not _grid_adjacent(pa, pb):
        (ra, ca), (rb, cb) = grid_position(pa), grid_position(pb)
        if ca == cb:
            # same column: the lower qubit moves up toward the upper one
            mover = pa if ra < rb else pb
            step = mover + 3
        elif ra != rb:
            # align rows first: the lower qubit moves up
            mover = pa if ra < rb else pb
            step = mover + 3
        else:
            # same row: the left qubit moves right
            mover = pa if ca < cb else pb
            step = mover + 1
        swaps.append((mover, step))
        qmap = qmap.swap_physical(mover, step)
        pa, pb = qmap.physical(a), qmap.physical(b)
    return swaps, qmap


def _apply_two_qubit_arr(arr: np.ndarray, n_q: int, t0: int, t1: int, u4: np.ndarray) -> np.ndarray:
    """Apply a 4x4 matrix on qubits (t0, t1); local bit 0 is t0."""
    shape = arr.shape
    view = arr.reshape((2,) * n_q + ((-1,) if arr.ndim > 1 else ()))
    ax0 = n_q - 1 - t0
    ax1 = n_q - 1 - t1
    moved = np.moveaxis(view, (ax1, ax0), (0, 1))
    rest = moved.shape[2:]
    flat = moved.reshape(4, -1)
    flat = u4 @ flat
    moved = flat.reshape((2, 2) + rest)
    out = np.moveaxis(moved, (0, 1), (ax1, ax0))
    return out.reshape(shape)


class Processor:
    """Executes logical circuits with noisy or ideal U_{pi/8} blocks.

    Per coupled gate pair the calibrated tau, the compiled super-cycle
    unitary and (for the original scheme) its n_swhh-th power are cached on
    first use and shared across runs; caches are read-only afterwards.
    """

    def __init__(
        self,
        system: SpinSystem,
        n_swhh: int,
        variant: str = ORIGINAL,
        calibration_order: int = 0,
        lattice: LatticeSpec | None = None,
    ):
        self.system = system
        self.n_q = system.n_q
        self.n_swhh = n_swhh
        self.variant = variant
        self.calibration_order = calibration_order
        self.lattice = lattice
        self._cache = PropagatorCache()
        self._tau: dict = {}
        self._w_cycle: dict = {}
        self._w_gate: dict = {}
        self._ideal_block = ideal_uphi(BLOCK_PHI).entries

    # -- per-pair compilation -------------------------------------------------

    def pair_tau(self, p: int, q: int) -> float:
        key = (min(p, q), max(p, q))
        if key not in self._tau:
            spec = UPhiSpec(key[0], key[1], BLOCK_PHI, self.n_swhh,
                            self.variant, self.calibration_order)
            self._tau[key] = gate_tau(self.system, spec)
        return self._tau[key]

    def _cycle_unitary(self, p: int, q: int) -> np.ndarray:
        key = (min(p, q), max(p, q))
        if key not in self._w_cycle:
            if self.system.couplings[key] == 0.0:
                raise ValueError(f"gate on uncoupled pair {key}")
            sched = super_whh_schedule(key[0], key[1], self.pair_tau(*key))
            self._w_cycle[key] = schedule_unitary(sched, self.system, self._cache).entries
        return self._w_cycle[key]

    def _gate_unitary(self, p: int, q: int) -> np.ndarray:
        key = (min(p, q), max(p, q))
        if key not in self._w_gate:
            self._w_gate[key] = np.linalg.matrix_power(self._cycle_unitary(*key), self.n_swhh)
        return self._w_gate[key]

    # -- block application ----------------------------------------------------

    def _noisy_block(self, amp: np.ndarray, p: int, q: int,
                     rng: np.random.Generator | None) -> np.ndarray:
        lo, hi = min(p, q), max(p, q)
        if self.variant == ORIGINAL:
            return self._gate_unitary(lo, hi) @ amp
        w = self._cycle_unitary(lo, hi)
        wrappers = draw_block_wrappers(rng, self.n_q, lo, hi, self.variant, self.n_swhh)
        for wrap in wrappers:
            assign = {i: a for i, a in enumerate(wrap.frame) if a != "i"}
            if assign:
                amp = apply_pauli_string_arr(amp, self.n_q, assign)
            if wrap.alpha is not None:
                r = rotation_matrix(wrap.alpha, np.pi / 2)
                amp = apply_single_qubit(amp, self.n_q, lo, r)
                amp = apply_single_qubit(amp, self.n_q, hi, r)
            amp = w @ amp
            if wrap.alpha is not None:
                rinv = rotation_matrix(wrap.alpha, -np.pi / 2)
                amp = apply_single_qubit(amp, self.n_q, lo, rinv)
                amp = apply_single_qubit(amp, self.n_q, hi, rinv)
            if assign:
                amp = apply_pauli_string_arr(amp, self.n_q, assign)
        return amp

    def _block(self, amp, p, q, rng, noisy, trace):
        trace.uphi_blocks += 1
        if noisy:
            return self._noisy_block(amp, p, q, rng)
        return _apply_two_qubit_arr(amp, self.n_q, min(p, q), max(p, q), self._ideal_block)

    def _realized_gate(self, amp, real: GateRealization, p0: int, p1: int,
                       rng, noisy, trace):
        """Apply a gate realization on physical slots (p0, p1)."""
        slots = (p0, p1)
        for layer in real.layers:
            if isinstance(layer, UphiBlockLayer):
                amp = self._block(amp, p0, p1, rng, noisy, trace)
            else:
                u = rotation_matrix(layer.axis, layer.angle)
                amp = apply_single_qubit(amp, self.n_q, slots[layer.slot], u)
        return amp

    # -- circuit execution ----------------------------------------------------

    def _run(self, circuit, state: StateVector, rng, noisy: bool):
        if state.dim != self.system.dim:
            raise ValueError(f"state dim {state.dim} vs register dim {self.system.dim}")
        amp = state.amplitudes.copy()
        qmap = QubitMap.identity(self.n_q)
        trace = ExecutionTrace()
        swap_real = decompose_gate("swap")
        for ev in circuit:
            trace.events += 1
            if ev.kind == "single":
                amp = apply_single_qubit(amp, self.n_q, qmap.physical(ev.logical), ev.u)
            elif ev.kind == "relabel":
                qmap = qmap.relabel(ev.perm)
            elif ev.kind == "two":
                a, b = ev.pair
                pa, pb = qmap.physical(a), qmap.physical(b)
                if self.lattice is not None and not _grid_adjacent(pa, pb):
                    swaps, qmap = route_pair(qmap, a, b, self.lattice)
                    for (sp, sq) in swaps:
                        amp = self._realized_gate(amp, swap_real, min(sp, sq), max(sp, sq),
                                                  rng, noisy, trace)
                        trace.swaps += 1
                    pa, pb = qmap.physical(a), qmap.physical(b)
                if noisy and self.system.couplings[pa, pb] == 0.0:
                    raise RuntimeError(f"gate on uncoupled physical pair ({pa}, {pb})")
                real = decompose_gate(ev.gate, ev.phi)
                if ev.gate in ("cphase",):
                    p0, p1 = min(pa, pb), max(pa, pb)
                else:
                    p0, p1 = pa, pb
                amp = self._realized_gate(amp, real, p0, p1, rng, noisy, trace)
            else:
                raise ValueError(f"unknown event kind {ev.kind!r}")
            amp = amp / np.linalg.norm(amp)
        return StateVector(state.n_q, amp), qmap, trace

    def execute(self, circuit, state: StateVector, rng: np.random.Generator | None = None):
        """Noisy execution; returns (state, final map, trace)."""
        if self.variant != ORIGINAL and rng is None:
            raise ValueError("randomized variants need an RNG stream")
        return self._run(circuit, state, rng, noisy=True)

    def ideal(self, circuit, state: StateVector):
        """Ideal execution: identical control flow, exact blocks."""
        return self._run(circuit, state, None, noisy=False)


def to_logical_order(state: StateVector, qmap: QubitMap) -> StateVector:
    """Amplitudes reordered so logical qubit i sits at bit i."""
    n = state.n_q
    idx = np.arange(state.dim)
    src = np.zeros_like(idx)
    for i in range(n):
        src |= ((idx >> i) & 1) << qmap.physical(i)
    return StateVector(n, state.amplitudes[src], state.applied)


def execute_circuit(
    circuit,
    system: SpinSystem,
    spec: dict,
    state: StateVector,
    rng: np.random.Generator | None = None,
    lattice: LatticeSpec | None = None,
):
    """One-shot noisy execution (builds a throwaway processor)."""
    proc = Processor(system, spec["n_swhh"], spec.get("variant", ORIGINAL),
                     spec.get("calibration_order", 0), lattice)
    return proc.execute(circuit, state, rng)


def ideal_execute(
    circuit,
    system: SpinSystem,
    state: StateVector,
    lattice: LatticeSpec | None = None,
    n_swhh: int = 1,
):
    """One-shot ideal execution with exact U_{pi/8} blocks."""
    proc = Processor(system, n_swhh, ORIGINAL, 0, lattice)
    return proc.ideal(circuit, state)
