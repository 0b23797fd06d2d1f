"""Exact statevector simulator for small qubit registers.

Conventions (used consistently across the library):

* Qubits are labelled 1..n.  Basis states are indexed little-endian: bit
  ``q-1`` of the integer index is the state of qubit ``q``.
* ``|0>`` is the all-zeros register; ``|m>`` (an "excitation label") is the
  basis state with qubit ``m`` in 1 and every other qubit in 0, i.e. index
  ``2**(m-1)``.
* ``Ry(a) = exp(i a sigma_y / 2)``, so ``<1|Ry(a)|0> = -sin(a/2)``;
  ``Rz(b) = exp(i b sigma_z / 2)``.  This sign choice is pinned by the
  composed encoder amplitudes (see tests) and must not be flipped casually.
* ``CNot(control, target)`` flips ``target`` when ``control`` is 1.

The entangling building block ``composite_uij`` conserves total excitation
number, which keeps every protocol circuit inside the span of ``|0>`` and
the one-excitation states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 10


@dataclass(frozen=True)
class CNot:
    control: int
    target: int


@dataclass(frozen=True)
class Ry:
    qubit: int
    angle: float


@dataclass(frozen=True)
class Rz:
    qubit: int
    angle: float


Gate = CNot | Ry | Rz


def _gate_qubits(g: Gate) -> tuple[int, ...]:
    if isinstance(g, CNot):
        return (g.control, g.target)
    return (g.qubit,)


@dataclass(frozen=True)
class GateCircuit:
    """An ordered gate list over ``n_qubits`` (gates apply left to right)."""

    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            qs = _gate_qubits(g)
            if len(set(qs)) != len(qs):
                raise ValueError(f"gate {g} uses a qubit twice")
            for q in qs:
                if not 1 <= q <= self.n_qubits:
                    raise ValueError(f"gate {g} addresses qubit {q} "
                                     f"outside 1..{self.n_qubits}")

    def __add__(self, other: "GateCircuit") -> "GateCircuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot concatenate circuits of different width")
        return GateCircuit(self.n_qubits, self.gates + other.gates)


@dataclass(frozen=True)
class StateVector:
    """Unit-norm complex amplitudes over the 2^n computational basis states."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.n_qubits,):
            raise ValueError(f"expected {2 ** self.n_qubits} amplitudes, "
                             f"got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state norm {norm} is not 1")
        object.__setattr__(self, "amplitudes", amps)
        self.amplitudes.setflags(write=False)


def ground_state(n_qubits: int) -> StateVector:
    amps = np.zeros(2 ** n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def excitation_state(n_qubits: int, amplitudes) -> StateVector:
    """State from amplitudes over ``{|0>, |1>, ..., |n>}`` (length n+1)."""
    amps = np.asarray(amplitudes, dtype=complex)
    if amps.shape != (n_qubits + 1,):
        raise ValueError(f"expected {n_qubits + 1} amplitudes")
    full = np.zeros(2 ** n_qubits, dtype=complex)
    full[0] = amps[0]
    for m in range(1, n_qubits + 1):
        full[1 << (m - 1)] = amps[m]
    return StateVector(n_qubits, full)


def _ry_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, s], [-s, c]], dtype=complex)


def _rz_matrix(angle: float) -> np.ndarray:
    return np.array([[np.exp(1j * angle / 2), 0],
                     [0, np.exp(-1j * angle / 2)]])


def _apply_single(amps: np.ndarray, qubit: int, m: np.ndarray) -> np.ndarray:
    bit = 1 << (qubit - 1)
    idx = np.arange(amps.shape[0])
    i0 = idx[(idx & bit) == 0]
    i1 = i0 | bit
    out = np.empty_like(amps)
    out[i0] = m[0, 0] * amps[i0] + m[0, 1] * amps[i1]
    out[i1] = m[1, 0] * amps[i0] + m[1, 1] * amps[i1]
    return out


def _apply_cnot(amps: np.ndarray, control: int, target: int) -> np.ndarray:
    cbit, tbit = 1 << (control - 1), 1 << (target - 1)
    idx = np.arange(amps.shape[0])
    i0 = idx[((idx & cbit) != 0) & ((idx & tbit) == 0)]
    i1 = i0 | tbit
    out = amps.copy()
    out[i0], out[i1] = amps[i1], amps[i0]
    return out


def _apply_gates(amps: np.ndarray, gates) -> np.ndarray:
    for g in gates:
        if isinstance(g, CNot):
            amps = _apply_cnot(amps, g.control, g.target)
        elif isinstance(g, Ry):
            amps = _apply_single(amps, g.qubit, _ry_matrix(g.angle))
        else:
            amps = _apply_single(amps, g.qubit, _rz_matrix(g.angle))
    return amps


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate, returning a new normalized state."""
    probe = GateCircuit(state.n_qubits, (gate,))  # index validation
    return StateVector(state.n_qubits,
                       _apply_gates(state.amplitudes.copy(), probe.gates))


def simulate(circuit: GateCircuit, state: StateVector | None = None) -> StateVector:
    """Run the circuit on ``state`` (ground state by default)."""
    if state is None:
        state = ground_state(circuit.n_qubits)
    elif state.n_qubits != circuit.n_qubits:
        raise ValueError("state width does not match circuit width")
    return StateVector(circuit.n_qubits,
                       _apply_gates(state.amplitudes.copy(), circuit.gates))


def circuit_matrix(circuit: GateCircuit) -> np.ndarray:
    """Full 2^n x 2^n unitary of the circuit (gate product in application order)."""
    u = np.eye(2 ** circuit.n_qubits, dtype=complex)
    # The index kernels act on axis 0, so all columns evolve at once.
    return _apply_gates(u, circuit.gates)


def composite_uij(i: int, j: int, alpha: float, beta: float = 0.0,
                  n_qubits: int | None = None) -> GateCircuit:
    """Excitation-conserving two-qubit block built from three CNOTs.

    Gate sequence (application order):
    ``C_ij, R_i(a,b)^+, C_ji, R_i(a,b), C_ij`` with the axis-tilted rotation
    ``R_i(a,b) = Rz(b) Ry(a) Rz(-b)``.  For real problems ``beta = 0`` and
    the rotations collapse to plain ``Ry``, a five-gate block.  Note the
    zero-angle block is the qubit swap, not the identity.
    """
    if i == j:
        raise ValueError("composite block needs two distinct qubits")
    n = n_qubits if n_qubits is not None else max(i, j)

    def rot(angle: float) -> tuple[Gate, ...]:
        if beta == 0.0:
            return (Ry(i, angle),)
        return (Rz(i, -beta), Ry(i, angle), Rz(i, beta))

    gates = (CNot(i, j),) + rot(-alpha) + (CNot(j, i),) + rot(alpha) + (CNot(i, j),)
    return GateCircuit(n, gates)


def projection(state: StateVector, m: int) -> complex:
    """Amplitude of the one-excitation basis state ``|m>`` (``m=0``: ground)."""
    if not 0 <= m <= state.n_qubits:
        raise IndexError(f"excitation label {m} out of range")
    return complex(state.amplitudes[0 if m == 0 else 1 << (m - 1)])


def one_excitation_block(circuit: GateCircuit, atol: float = 1e-9) -> np.ndarray:
    """(n+1) x (n+1) matrix of the circuit on ``span{|0>, |1>, ..., |n>}``.

    Row/column 0 is the ground state; row/column m is excitation ``|m>``.
    Raises ValueError if the circuit leaks amplitude out of that span, i.e.
    if it does not conserve excitation number on these inputs.
    """
    n = circuit.n_qubits
    labels = [0] + [1 << (m - 1) for m in range(1, n + 1)]
    block = np.zeros((n + 1, n + 1), dtype=complex)
    for col, idx in enumerate(labels):
        amps = np.zeros(2 ** n, dtype=complex)
        amps[idx] = 1.0
        out = _apply_gates(amps, circuit.gates)
        block[:, col] = out[labels]
        outside = np.linalg.norm(np.delete(out, labels))
        if outside > atol:
            raise ValueError(
                f"circuit leaks {outside:.3e} outside the one-excitation span")
    return block


def prob_one(state: StateVector, qubit: int) -> float:
    """Probability of measuring ``qubit`` in state 1."""
    if not 1 <= qubit <= state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    bit = 1 << (qubit - 1)
    idx = np.arange(state.amplitudes.size)
    p = float(np.sum(np.abs(state.amplitudes[(idx & bit) != 0]) ** 2))
    return min(1.0, p)


@dataclass(frozen=True)
class ShotRecord:
    """Measurement series as (shots, ones) pairs with the pooled estimate."""

    series: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(map(tuple, self.series)))
        for shots, ones in self.series:
            if not 0 <= ones <= shots:
                raise ValueError(f"invalid series entry ({shots}, {ones})")

    @property
    def total_shots(self) -> int:
        return sum(s for s, _ in self.series)

    @property
    def total_ones(self) -> int:
        return sum(o for _, o in self.series)

    @property
    def p_hat(self) -> float:
        """Pooled estimate: total ones over total shots."""
        return self.total_ones / self.total_shots


def sample_shots(state: StateVector, qubit: int, shots: int,
                 seed=None, rng: np.random.Generator | None = None) -> ShotRecord:
    """Draw ``shots`` projective measurements of ``qubit`` (one series)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    p = prob_one(state, qubit)
    ones = int(rng.binomial(shots, p))
    return ShotRecord(series=((shots, ones),))
