"""Spin-system description and Hamiltonian construction.

Two lattices are built in: a linear four-qubit chain with uniform
nearest-neighbor coupling J, and a 3x3 grid where horizontal/vertical
neighbors couple with J and the diagonals of each 2x2 plaquette with
J * 2**-1.5 (dipolar 1/r^3 falloff at distance sqrt(2)).  Longer-range
pairs are uncoupled.

Grid site numbering (matching the chain's left-to-right order):

    6 7 8
    3 4 5
    0 1 2
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qstate import Operator, pauli_string

CHAIN4 = "chain4"
GRID3X3 = "grid3x3"
LATTICE_KINDS = (CHAIN4, GRID3X3)

#: relative strength of plaquette-diagonal couplings on the grid
DIAGONAL_FACTOR = 2.0 ** (-1.5)


@dataclass(frozen=True)
class SpinSystem:
    """n_q spins with symmetric couplings J_{kl} (1/time) and optional
    Larmor frequencies (default zero: the broadband pi-pulse train that
    suppresses the Zeeman term is not simulated explicitly)."""

    n_q: int
    couplings: np.ndarray
    larmor: np.ndarray | None = None

    def __post_init__(self):
        if self.n_q < 2:
            raise ValueError("need at least two qubits")
        J = np.asarray(self.couplings, dtype=float)
        if J.shape != (self.n_q, self.n_q):
            raise ValueError(f"coupling matrix shape {J.shape}, expected {(self.n_q, self.n_q)}")
        if not np.allclose(J, J.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(J) != 0):
            raise ValueError("coupling matrix must have zero diagonal")
        om = np.zeros(self.n_q) if self.larmor is None else np.asarray(self.larmor, dtype=float)
        if om.shape != (self.n_q,):
            raise ValueError(f"larmor vector shape {om.shape}, expected {(self.n_q,)}")
        object.__setattr__(self, "couplings", J)
        object.__setattr__(self, "larmor", om)

    @property
    def dim(self) -> int:
        return 2**self.n_q

    def coupled_pairs(self) -> list[tuple[int, int]]:
        """Ordered (k < l) pairs with nonzero coupling."""
        return [
            (k, l)
            for k in range(self.n_q)
            for l in range(k + 1, self.n_q)
            if self.couplings[k, l] != 0.0
        ]


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    base_coupling: float = 1.0

    def __post_init__(self):
        if self.kind not in LATTICE_KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}")

    @property
    def n_q(self) -> int:
        return 4 if self.kind == CHAIN4 else 9


def grid_position(site: int) -> tuple[int, int]:
    """(row, col) of a grid3x3 site."""
    return divmod(site, 3)


def build_couplings(spec: LatticeSpec) -> SpinSystem:
    """Coupling matrix for a lattice; Larmor frequencies all zero."""
    n = spec.n_q
    J = np.zeros((n, n))
    if spec.kind == CHAIN4:
        for k in range(n - 1):
            J[k, k + 1] = J[k + 1, k] = spec.base_coupling
    else:
        for a in range(n):
            ra, ca = grid_position(a)
            for b in range(a + 1, n):
                rb, cb = grid_position(b)
                dr, dc = abs(ra - rb), abs(ca - cb)
                if dr + dc == 1:
                    J[a, b] = J[b, a] = spec.base_coupling
                elif dr == 1 and dc == 1:
                    J[a, b] = J[b, a] = spec.base_coupling * DIAGONAL_FACTOR
    return SpinSystem(n, J)


def dipole_hamiltonian(system: SpinSystem) -> Operator:
    """Secular dipolar coupling
    sum_{k<l} (J_kl/4) (2 sz sz - sx sx - sy sy); Hermitian, traceless."""
    if system.n_q > 12:
        raise ValueError("dense construction limited to 12 qubits")
    h = np.zeros((system.dim, system.dim), dtype=complex)
    for k, l in system.coupled_pairs():
        c = system.couplings[k, l] / 4.0
        h += c * (
            2.0 * pauli_string(system.n_q, {k: "z", l: "z"}).entries
            - pauli_string(system.n_q, {k: "x", l: "x"}).entries
            - pauli_string(system.n_q, {k: "y", l: "y"}).entries
        )
    return Operator(h, kind="hermitian")


def zeeman_hamiltonian(system: SpinSystem) -> Operator:
    """-sum_k (omega_k/2) sz^k."""
    h = np.zeros((system.dim, system.dim), dtype=complex)
    for k in range(system.n_q):
        if system.larmor[k] != 0.0:
            h -= (system.larmor[k] / 2.0) * pauli_string(system.n_q, {k: "z"}).entries
    return Operator(h, kind="hermitian")
