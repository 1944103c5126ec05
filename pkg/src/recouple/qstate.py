"""Dense complex state-vector and operator kernel.

Conventions used throughout the package:

* Qubit ``j`` corresponds to bit ``j`` of the computational basis index,
  i.e. qubit 0 is the least significant bit.  A Pauli string such as
  ``pauli_string(2, {0: "z", 1: "z"})`` therefore equals
  ``diag(1, -1, -1, 1)`` over the index order ``|00>, |01>, |10>, |11>``
  (written most-significant qubit first).
* hbar = 1 everywhere: couplings carry units of inverse time, durations of
  time, and propagators are ``exp(-i H tau)``.
* All matrices are dense complex128.  The kernel is sized for at most
  twelve qubits (dim 4096); the experiments in this package use up to nine.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

#: Pauli axis labels; "i" denotes the identity.
AXES = ("i", "x", "y", "z")

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

#: Renormalize a state after this many unitary applications to absorb
#: floating-point drift.
RENORM_EVERY = 1000


def pauli_matrix(axis: str) -> np.ndarray:
    """2x2 matrix of a single Pauli axis ("i", "x", "y" or "z")."""
    return _PAULI[axis].copy()


class DimensionMismatchError(ValueError):
    pass


class OperatorKindError(ValueError):
    pass


@dataclass(frozen=True)
class Operator:
    """Dense operator with a role tag.

    ``kind`` is one of ``"hermitian"``, ``"unitary"`` or ``"general"``; the
    tag states how the operator is meant to be used and can be checked on
    demand with :meth:`check`.
    """

    entries: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_qubits(self) -> int:
        n = self.dim.bit_length() - 1
        if 2**n != self.dim:
            raise ValueError(f"dimension {self.dim} is not a power of two")
        return n

    def dagger(self) -> "Operator":
        return Operator(self.entries.conj().T, kind=self.kind)

    def check(self, atol: float | None = None) -> None:
        """Verify the kind tag; raises OperatorKindError on failure."""
        if self.kind == "unitary":
            tol = 1e-10 if atol is None else atol
            err = np.linalg.norm(self.entries.conj().T @ self.entries - np.eye(self.dim), 2)
            if err > tol:
                raise OperatorKindError(f"not unitary within {tol}: error {err:.3e}")
        elif self.kind == "hermitian":
            tol = 1e-12 if atol is None else atol
            err = np.linalg.norm(self.entries - self.entries.conj().T, 2)
            if err > tol:
                raise OperatorKindError(f"not Hermitian within {tol}: error {err:.3e}")

    def tagged(self, kind: str, atol: float | None = None) -> "Operator":
        """Return the same entries under a different (verified) role tag."""
        op = Operator(self.entries, kind=kind)
        op.check(atol)
        return op


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitude vector over the 2**n_q computational basis.

    ``applied`` counts unitary applications since the last renormalization;
    every :data:`RENORM_EVERY` applications the norm is refreshed.
    """

    n_q: int
    amplitudes: np.ndarray
    applied: int = 0

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape[0] != 2**self.n_q:
            raise ValueError(f"expected {2**self.n_q} amplitudes, got {amp.shape[0]}")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def basis_state(n_q: int, index: int) -> StateVector:
    if not 0 <= index < 2**n_q:
        raise ValueError(f"basis index {index} out of range for {n_q} qubits")
    amp = np.zeros(2**n_q, dtype=complex)
    amp[index] = 1.0
    return StateVector(n_q, amp)


def pauli_string(n_q: int, assignments: Mapping[int, str]) -> Operator:
    """Tensor product of Pauli operators, identity on unassigned qubits.

    The result is both Hermitian and unitary; it is tagged "unitary" since
    its main use is as an instantaneous pulse.
    """
    for q in assignments:
        if not 0 <= q < n_q:
            raise IndexError(f"qubit {q} out of range for {n_q} qubits")
    out = np.array([[1.0 + 0j]])
    for q in range(n_q):
        out = np.kron(_PAULI[assignments.get(q, "i")], out)
    return Operator(out, kind="unitary")


def embed_local(op: Operator, targets: Sequence[int], n_q: int) -> Operator:
    """Embed a d-qubit operator on the given targets of an n_q register.

    ``targets[j]`` hosts local qubit ``j`` (local bit j of the operator's
    own index).  Preserves the kind tag.
    """
    targets = list(targets)
    d = len(targets)
    if op.dim != 2**d:
        raise DimensionMismatchError(f"operator dim {op.dim} does not match {d} targets")
    if len(set(targets)) != d:
        raise ValueError(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < n_q:
            raise IndexError(f"target {t} out of range for {n_q} qubits")
    rest = [q for q in range(n_q) if q not in targets]
    big = np.kron(np.eye(2 ** len(rest), dtype=complex), op.entries)
    # big acts on packed index (rest_bits << d) | local_bits; map to full indices
    idx = np.arange(2**n_q)
    packed = np.zeros_like(idx)
    for j, t in enumerate(targets):
        packed |= ((idx >> t) & 1) << j
    for j, r in enumerate(rest):
        packed |= ((idx >> r) & 1) << (d + j)
    full = big[np.ix_(packed, packed)]
    return Operator(full, kind=op.kind)


def apply_unitary(state: StateVector, u: Operator) -> StateVector:
    """Apply a unitary-tagged operator to a state."""
    if u.kind != "unitary":
        raise OperatorKindError(f"operator tagged {u.kind!r}, expected 'unitary'")
    if u.dim != state.dim:
        raise DimensionMismatchError(f"operator dim {u.dim} vs state dim {state.dim}")
    amp = u.entries @ state.amplitudes
    applied = state.applied + 1
    if applied % RENORM_EVERY == 0:
        amp = amp / np.linalg.norm(amp)
    return StateVector(state.n_q, amp, applied)


def state_fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; symmetric and insensitive to a shared global phase."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"state dims {a.dim} vs {b.dim}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


class PropagatorCache:
    """Cache of Hermitian eigendecompositions and the propagators built
    from them.

    Keyed by content hash of the Hamiltonian entries, so repeated calls
    with equal matrices (not necessarily the same object) share the
    spectral factorization.  Entries are read-only after construction.
    """

    def __init__(self):
        self._eigs: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        self._props: dict[tuple[str, float], Operator] = {}

    @staticmethod
    def _key(h: Operator) -> str:
        return hashlib.sha1(np.ascontiguousarray(h.entries).tobytes()).hexdigest()

    def eig(self, h: Operator) -> tuple[np.ndarray, np.ndarray]:
        key = self._key(h)
        if key not in self._eigs:
            w, v = np.linalg.eigh(h.entries)
            self._eigs[key] = (w, v)
        return self._eigs[key]

    def propagator(self, h: Operator, tau: float) -> Operator:
        if h.kind != "hermitian":
            raise OperatorKindError(f"operator tagged {h.kind!r}, expected 'hermitian'")
        key = (self._key(h), float(tau))
        if key not in self._props:
            w, v = self.eig(h)
            u = (v * np.exp(-1j * w * tau)) @ v.conj().T
            self._props[key] = Operator(u, kind="unitary")
        return self._props[key]


_default_cache = PropagatorCache()


def propagator(h: Operator, tau: float, cache: PropagatorCache | None = None) -> Operator:
    """exp(-i h tau) through a cached Hermitian eigendecomposition."""
    return (cache or _default_cache).propagator(h, tau)


# ---------------------------------------------------------------------------
# fast in-place style kernels (operate on the leading axis, so they apply
# both to amplitude vectors and to matrices treated as stacked columns)
# ---------------------------------------------------------------------------

def apply_single_qubit(arr: np.ndarray, n_q: int, qubit: int, u2: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix to one qubit of the leading index of ``arr``."""
    shape = arr.shape
    view = arr.reshape(2 ** (n_q - 1 - qubit), 2, -1)
    out = np.einsum("ab,ibj->iaj", u2, view)
    return out.reshape(shape)


def apply_all_qubits(arr: np.ndarray, n_q: int, u2: np.ndarray) -> np.ndarray:
    """Apply the same 2x2 matrix to every qubit (broadband pulse)."""
    for q in range(n_q):
        arr = apply_single_qubit(arr, n_q, q, u2)
    return arr


def apply_pauli_string_arr(arr: np.ndarray, n_q: int, assignments: Mapping[int, str]) -> np.ndarray:
    """Apply a Pauli string via index permutation and phases (O(N))."""
    dim = 2**n_q
    mask = 0
    for q, ax in assignments.items():
        if ax in ("x", "y"):
            mask |= 1 << q
    idx = np.arange(dim)
    src = idx ^ mask
    phase = np.ones(dim, dtype=complex)
    for q, ax in assignments.items():
        bit = (src >> q) & 1
        if ax == "y":
            phase = phase * (1j * (1 - 2 * bit))
        elif ax == "z":
            phase = phase * (1 - 2 * bit)
    out = arr[src] * (phase.reshape((dim,) + (1,) * (arr.ndim - 1)))
    return out


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """Single-qubit rotation exp(-i sigma_axis angle / 2)."""
    g = _PAULI[axis]
    return np.cos(angle / 2) * np.eye(2, dtype=complex) - 1j * np.sin(angle / 2) * g
