"""Quantum sawtooth map as a logical gate circuit, plus its exact one-step
reference.

One map iteration applies a quadratic kick phase in the angle basis and a
quadratic kinetic phase in the momentum basis:

    |psi>' = exp(-i T p^2 / 2) exp(-i k V(theta)) |psi>,  V = (theta-pi)^2/2

with T = 2 pi / 2**n_q and kick strength k = K / T.  The computational
basis is the momentum basis with p equal to the basis integer m in
0 .. 2**n_q - 1 (bit j of m is qubit j); the angle grid is
theta_j = 2 pi j / 2**n_q.  The sign of the momentum basis (equivalently,
of the kick phase relative to the transform direction) is fixed so that
the classical limit is the sawtooth map p' = p + k (theta - pi),
theta' = theta + T p', which is stable (integrable) for -4 < K < 0; at
the K = -0.5 working point the residual gate errors then accumulate
coherently instead of diffusively, which is the regime under study.
Both the circuit and the FFT reference use this one convention, so their
agreement is exact and fidelity results do not depend on the window
choice.

The circuit decomposition: a transform to the angle basis (inverse
Fourier), the kick phases, the transform back, and the kinetic phases.
Each Fourier transform costs n_q Hadamard gates plus n_q(n_q-1)/2
controlled-phase gates, with the bit reversal handled by a relabel event;
each quadratic phase costs n_q single-qubit phase gates plus
n_q(n_q-1)/2 controlled-phase gates (the basis integer x expands as
x^2 = sum_j 4^j b_j + sum_{i<j} 2^{i+j+1} b_i b_j; constant terms are a
dropped global phase).  Total: 2 n_q^2 + 2 n_q counted gates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .processor import GateEvent, relabel, single_qubit, two_qubit
from .qstate import StateVector, basis_state

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

#: momentum bit pattern of the reference initial state at nine qubits
_INITIAL_BITS = "100110011"


@dataclass(frozen=True)
class SawtoothParams:
    n_q: int = 9
    K: float = -0.5

    def __post_init__(self):
        if self.n_q < 2:
            raise ValueError("need at least two qubits")

    @property
    def dim(self) -> int:
        return 2**self.n_q

    @property
    def T_kick(self) -> float:
        return 2 * np.pi / self.dim

    @property
    def k_strength(self) -> float:
        return self.K / self.T_kick


def _fourier_events(n_q: int, sign: int) -> list:
    """Gate events for F_{y,x} = exp(sign * 2 pi i x y / N) / sqrt(N),
    bit reversal as a trailing relabel."""
    events = []
    for i in range(n_q - 1, -1, -1):
        events.append(single_qubit(_HADAMARD, i))
        for j in range(i - 1, -1, -1):
            events.append(two_qubit("cphase", j, i, phi=sign * 2 * np.pi / 2 ** (i - j + 1)))
    events.append(relabel(tuple(reversed(range(n_q)))))
    return events


def _quadratic_phase_events(n_q: int, c2: float, c1: float) -> list:
    """Gate events for the diagonal phase exp(i (c2 x^2 + c1 x))."""
    events = []
    for j in range(n_q):
        ang = c2 * 4**j + c1 * 2**j
        events.append(single_qubit(np.diag([1.0, np.exp(1j * ang)]), j))
        for i in range(j):
            events.append(two_qubit("cphase", i, j, phi=c2 * 2 ** (i + j + 1)))
    return events


def sawtooth_circuit(params: SawtoothParams) -> list:
    """One map iteration as a list of gate events."""
    n = params.n_q
    N = params.dim
    k = params.k_strength
    step = 2 * np.pi / N
    events = []
    events += _fourier_events(n, -1)                      # momentum -> angle
    events += _quadratic_phase_events(                    # kick
        n, c2=(k / 2) * step**2, c1=-(k / 2) * 2 * step * np.pi
    )
    events += _fourier_events(n, +1)                      # angle -> momentum
    events += _quadratic_phase_events(n, c2=-params.T_kick / 2, c1=0.0)
    return events


def gate_count(circuit) -> int:
    """Counted quantum gates (relabel events are free bookkeeping)."""
    return sum(1 for ev in circuit if ev.kind in ("single", "two"))


def initial_state(params: SawtoothParams) -> StateVector:
    """Reference momentum eigenstate; the nine-qubit pattern 100110011
    (index 307), scaled to the register size otherwise."""
    if params.n_q == 9:
        index = int(_INITIAL_BITS, 2)
    else:
        index = (int(_INITIAL_BITS, 2) * params.dim) // 512
    return basis_state(params.n_q, index)


def exact_step(state: StateVector, params: SawtoothParams) -> StateVector:
    """Apply one map iteration directly through discrete Fourier
    transforms; the oracle for the circuit generator."""
    N = params.dim
    if state.dim != N:
        raise ValueError(f"state dim {state.dim} vs {N}")
    m = np.arange(N)
    theta = 2 * np.pi * m / N
    pos = np.fft.fft(state.amplitudes) / np.sqrt(N)
    pos = pos * np.exp(1j * params.k_strength * (theta - np.pi) ** 2 / 2)
    mom = np.fft.ifft(pos) * np.sqrt(N)
    mom = mom * np.exp(-1j * params.T_kick * m**2 / 2)
    return StateVector(params.n_q, mom, state.applied)
