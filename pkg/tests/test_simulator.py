import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kron_circuit_matrix
from qlinsys.simulator import (CNot, GateCircuit, Ry, Rz, ShotRecord,
                               apply_gate, circuit_matrix, composite_uij,
                               excitation_state, ground_state,
                               one_excitation_block, prob_one, projection,
                               sample_shots, simulate)

# Truth-table matrix of a CNOT that flips the first qubit when the second
# is set, written in index order (|00>, |10>, |01>, |11>).
CNOT_FLIP_FIRST = np.array([[1, 0, 0, 0],
                            [0, 1, 0, 0],
                            [0, 0, 0, 1],
                            [0, 0, 1, 0]], dtype=complex)


def iz_diagonal(n):
    """Total excitation number of each basis state."""
    return np.array([bin(i).count("1") for i in range(2 ** n)], dtype=float)


class TestGates:
    def test_cnot_truth_table(self):
        state = excitation_state(2, [0, 1, 0])  # qubit 1 excited
        out = apply_gate(state, CNot(1, 2))
        assert projection(out, 1) == pytest.approx(0)
        assert abs(out.amplitudes[3]) == pytest.approx(1.0)  # both excited

    def test_cnot_control_off(self):
        state = excitation_state(2, [0, 0, 1])  # qubit 2 excited only
        out = apply_gate(state, CNot(1, 2))
        np.testing.assert_allclose(out.amplitudes, state.amplitudes)

    def test_ry_zero_is_identity(self, rng):
        amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        state = type(ground_state(3))(3, amps / np.linalg.norm(amps))
        out = apply_gate(state, Ry(2, 0.0))
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-15)

    def test_ry_sign_convention(self):
        # <1|Ry(a)|0> = -sin(a/2): the choice every reference amplitude
        # in this suite depends on.
        out = apply_gate(ground_state(1), Ry(1, 0.7))
        assert out.amplitudes[0] == pytest.approx(np.cos(0.35))
        assert out.amplitudes[1] == pytest.approx(-np.sin(0.35))

    def test_rz_phases(self):
        state = excitation_state(1, [1 / np.sqrt(2), 1 / np.sqrt(2)])
        out = apply_gate(state, Rz(1, 0.9))
        assert out.amplitudes[0] == pytest.approx(
            np.exp(1j * 0.45) / np.sqrt(2))
        assert out.amplitudes[1] == pytest.approx(
            np.exp(-1j * 0.45) / np.sqrt(2))

    def test_index_validation(self):
        with pytest.raises(ValueError):
            apply_gate(ground_state(2), Ry(3, 0.1))
        with pytest.raises(ValueError):
            apply_gate(ground_state(2), CNot(1, 1))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_gates_preserve_norm(self, seed):
        gen = np.random.default_rng(seed)
        amps = gen.standard_normal(8) + 1j * gen.standard_normal(8)
        state = type(ground_state(3))(3, amps / np.linalg.norm(amps))
        gates = [CNot(1, 3), Ry(2, gen.uniform(0, 7)), Rz(1, gen.uniform(0, 7))]
        for g in gates:
            state = apply_gate(state, g)
            assert abs(np.linalg.norm(state.amplitudes) - 1) <= 1e-12


class TestCircuitMatrix:
    def test_empty_circuit(self):
        np.testing.assert_array_equal(circuit_matrix(GateCircuit(2)), np.eye(4))

    def test_single_cnot_matrix(self):
        # CNOT(2, 1) in basis order (|0>, |1>, |2>, |12>) swaps the last
        # two columns: it flips qubit 1 exactly when qubit 2 is set.
        got = circuit_matrix(GateCircuit(2, (CNot(2, 1),)))
        np.testing.assert_array_equal(got, CNOT_FLIP_FIRST)

    def test_unitarity(self, rng):
        circ = composite_uij(1, 3, 0.8, 0.3)
        u = circuit_matrix(circ)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(8), atol=1e-12)

    def test_against_kronecker_oracle(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 5))
            gates = []
            for _ in range(int(rng.integers(1, 8))):
                kind = rng.integers(0, 3)
                if kind == 0:
                    i, j = rng.choice(np.arange(1, n + 1), 2, replace=False)
                    gates.append(CNot(int(i), int(j)))
                elif kind == 1:
                    gates.append(Ry(int(rng.integers(1, n + 1)),
                                    float(rng.uniform(0, 7))))
                else:
                    gates.append(Rz(int(rng.integers(1, n + 1)),
                                    float(rng.uniform(0, 7))))
            circ = GateCircuit(n, tuple(gates))
            np.testing.assert_allclose(circuit_matrix(circ),
                                       kron_circuit_matrix(circ), atol=1e-12)


class TestCompositeBlock:
    def test_zero_angle_is_swap(self):
        # With identity rotations the three CNOTs remain and compose to
        # the qubit swap; the block is NOT the identity at zero angle.
        got = circuit_matrix(composite_uij(1, 2, 0.0, 0.0))
        swap = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
        np.testing.assert_allclose(got, swap, atol=1e-15)

    def test_gate_counts(self):
        assert len(composite_uij(1, 2, 0.5).gates) == 5
        assert len(composite_uij(1, 2, 0.5, 0.3).gates) == 9

    def test_commutes_with_excitation_number(self, rng):
        # 1e4 random angle pairs; the commutator with the excitation-number
        # diagonal must vanish.
        iz = iz_diagonal(2)
        worst = 0.0
        for _ in range(10_000):
            alpha, beta = rng.uniform(0, 2 * np.pi, size=2)
            u = circuit_matrix(composite_uij(1, 2, alpha, beta))
            comm = u * iz[None, :] - iz[:, None] * u
            worst = max(worst, np.abs(comm).max())
        assert worst <= 1e-12

    def test_composed_encoder_amplitudes(self, rng):
        # 1e4 random (beta1, beta2): amplitudes after Ry(1, b1) then the
        # (1,2) block must equal the closed form
        # (cos(b1/2), sin(b2) sin(b1/2), -cos(b2) sin(b1/2)).
        # This is the test that pins the global rotation sign convention.
        worst = 0.0
        for _ in range(10_000):
            b1, b2 = rng.uniform(0, 2 * np.pi, size=2)
            circ = GateCircuit(2, (Ry(1, b1),) + composite_uij(1, 2, b2).gates)
            amps = simulate(circ).amplitudes
            want = np.array([np.cos(b1 / 2),
                             np.sin(b2) * np.sin(b1 / 2),
                             -np.cos(b2) * np.sin(b1 / 2), 0.0])
            worst = max(worst, np.abs(amps - want).max())
        assert worst <= 1e-12

    def test_one_excitation_closure(self, rng):
        # Chains of composite blocks keep one-excitation inputs inside
        # span{|0>, |1>, ..., |n>}.
        for _ in range(300):
            n = int(rng.integers(2, 5))
            gates = []
            for _ in range(int(rng.integers(1, 6))):
                i, j = rng.choice(np.arange(1, n + 1), 2, replace=False)
                gates.append(composite_uij(int(i), int(j),
                                           float(rng.uniform(0, 7)),
                                           float(rng.uniform(0, 7)),
                                           n_qubits=n))
            circ = GateCircuit(n, sum((c.gates for c in gates), ()))
            amps = rng.standard_normal(n + 1)
            amps /= np.linalg.norm(amps)
            out = simulate(circ, excitation_state(n, amps)).amplitudes
            labels = [0] + [1 << (m - 1) for m in range(1, n + 1)]
            outside = np.linalg.norm(np.delete(out, labels))
            assert outside <= 1e-12

    def test_one_excitation_block_is_orthogonal(self):
        circ = (composite_uij(1, 2, 0.8, n_qubits=3)
                + composite_uij(2, 3, 1.7, n_qubits=3))
        block = one_excitation_block(circ)
        assert np.abs(block.imag).max() <= 1e-14
        w = block.real
        np.testing.assert_allclose(w @ w.T, np.eye(4), atol=1e-12)
        # The ground state is untouched by composite chains.
        np.testing.assert_allclose(w[0], [1, 0, 0, 0], atol=1e-14)

    def test_one_excitation_block_rejects_leaky_circuit(self):
        # A bare rotation mid-register mixes excitation sectors.
        circ = GateCircuit(2, (Ry(2, 1.0),))
        with pytest.raises(ValueError):
            one_excitation_block(circ)


class TestProjectionAndSampling:
    def test_projection_of_basis_state(self):
        state = excitation_state(3, [0, 0, 1, 0])
        assert projection(state, 2) == pytest.approx(1.0)
        assert projection(state, 1) == pytest.approx(0.0)
        assert projection(state, 0) == pytest.approx(0.0)

    def test_projection_range(self):
        with pytest.raises(IndexError):
            projection(ground_state(2), 3)

    def test_prob_one_counts_all_sectors(self):
        # |11> has both qubits set; prob_one must include it.
        amps = np.zeros(4, dtype=complex)
        amps[3] = 1.0
        state = type(ground_state(2))(2, amps)
        assert prob_one(state, 1) == pytest.approx(1.0)

    def test_deterministic_endpoints(self):
        zero = ground_state(2)
        assert sample_shots(zero, 1, shots=100, seed=0).p_hat == 0.0
        one = excitation_state(1, [0, 1])
        assert sample_shots(one, 1, shots=100, seed=0).p_hat == 1.0

    def test_binomial_concentration(self):
        # p = x1^2 of the two-equation reference; 1000 seeds at 4096 shots
        # must land within the 3-sigma binomial bound at least 99% of the
        # time (Monte Carlo check of the sampler's distribution).
        x1 = 0.578947368421
        p = x1 * x1
        amps = np.array([np.sqrt(1 - p), np.sqrt(p)], dtype=complex)
        state = type(ground_state(1))(1, amps)
        bound = 3 * np.sqrt(p * (1 - p) / 4096)
        hits = sum(
            abs(sample_shots(state, 1, shots=4096, seed=s).p_hat - p) <= bound
            for s in range(1000))
        assert hits >= 990

    def test_shot_record_pooling(self):
        rec = ShotRecord(series=((1024, 100), (1024, 200), (512, 56)))
        assert rec.p_hat == (100 + 200 + 56) / (1024 + 1024 + 512)

    def test_seed_determinism(self):
        state = excitation_state(1, [np.sqrt(0.5), np.sqrt(0.5)])
        a = sample_shots(state, 1, shots=500, seed=42)
        b = sample_shots(state, 1, shots=500, seed=42)
        assert a == b
