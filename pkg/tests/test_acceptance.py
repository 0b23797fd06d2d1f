"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  Tolerances are fixed here and must not be loosened
to make a run green.
"""

import time

import numpy as np
import pytest

from qlinsys.embedding import apply_embedding, embed_full, embed_reduced
from qlinsys.linalg import (LinearSystem, classical_solve,
                            random_encodable_rhs, random_feasible_matrix)
from qlinsys.noise import (NoiseModel, error_report, fit_correction,
                           measure_grid)
from qlinsys.simulator import (GateCircuit, Ry, apply_gate, circuit_matrix,
                               composite_uij, excitation_state, ground_state,
                               projection, simulate)
from qlinsys.spinchain import (COUPLING_BOUNDS, FREQUENCY_BOUNDS, ChainSpec,
                               evolve, fit_chain, projection_coefficients)
from qlinsys.synthesis import (build_full_protocol, coefficient_probe,
                               encoding_circuit, extraction_circuit,
                               readout_site, solve_extraction)


def report(criterion, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {criterion}] {status}{': ' + detail if detail else ''}")
    assert ok, f"criterion {criterion} failed: {detail}"


def circuit_amplitude(system, k):
    circ = build_full_protocol(system, k)
    return projection(simulate(circ), readout_site(system.dim)).real


def test_criterion_1_two_equation_worked_example(two_eq):
    t0 = time.perf_counter()
    system = LinearSystem(two_eq.a, two_eq.b)
    amp1 = circuit_amplitude(system, 1)
    amp2 = circuit_amplitude(system, 2)
    elapsed = time.perf_counter() - t0
    ok = (abs(amp1 - 0.5789) <= 5e-5 and abs(amp2 - 0.7368) <= 5e-5
          and elapsed < 1.0)
    report(1, ok, f"x1={amp1:.6f} x2={amp2:.6f} in {elapsed:.2f}s")


def test_criterion_2_three_equation_worked_example(three_eq):
    t0 = time.perf_counter()
    system = LinearSystem(three_eq.a, three_eq.b)
    amps = [circuit_amplitude(system, k) for k in (1, 2, 3)]
    elapsed = time.perf_counter() - t0
    ok = (all(abs(a - w) <= 5e-5 for a, w in zip(amps, three_eq.x))
          and elapsed < 5.0)
    report(2, ok, "x=(" + ", ".join(f"{a:.5f}" for a in amps)
           + f") in {elapsed:.2f}s")


def test_criterion_3_embedding_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240101)
    worst_solution = worst_ortho = 0.0
    for i in range(1000):
        dim = 2 + i % 4  # cycles M through 2..5
        a = random_feasible_matrix(rng, dim)
        b = random_encodable_rhs(rng, dim)
        x = classical_solve(LinearSystem(a, b))

        full = embed_full(a)
        worst_ortho = max(worst_ortho, np.abs(
            full.u @ full.u.T - np.eye(2 * dim)).max())
        worst_solution = max(worst_solution, np.abs(
            apply_embedding(full, b)[:dim] - x).max())

        k = int(rng.integers(1, dim + 1))
        red = embed_reduced(a, k)
        worst_ortho = max(worst_ortho, np.abs(
            red.u @ red.u.T - np.eye(dim + 1)).max())
        worst_solution = max(worst_solution, abs(
            apply_embedding(red, b)[0] - x[k - 1]))
    elapsed = time.perf_counter() - t0
    ok = worst_solution <= 1e-10 and worst_ortho <= 1e-12 and elapsed < 30.0
    report(3, ok, f"max solution err {worst_solution:.2e}, max ortho "
                  f"{worst_ortho:.2e}, {elapsed:.1f}s for 1000 systems")


def test_criterion_4_reference_angle_branches(two_eq, three_eq):
    worst = 0.0

    def encoder_state(betas, n):
        return simulate(encoding_circuit(betas, n_qubits=n))

    # two-equation encoder: amplitudes must carry the rhs exactly
    state = encoder_state(two_eq.betas, 3)
    for site, want in ((0, 0.0), (1, -0.6), (2, 0.8)):
        worst = max(worst, abs(projection(state, site).real - want))
    # two-equation extraction branches
    for alphas, want in ((two_eq.alphas_k1, 0.5789),
                         (two_eq.alphas_k2, 0.7368)):
        out = simulate(extraction_circuit(alphas, n_qubits=3), state)
        worst = max(worst, abs(projection(out, 2).real - want))
    # three-equation encoder
    state3 = encoder_state(three_eq.betas, 4)
    for site, want in ((1, -0.5), (2, 0.7), (3, -0.5)):
        worst = max(worst, abs(projection(state3, site).real - want))
    # three-equation extraction branches
    for k, want in zip((1, 2, 3), three_eq.x):
        out = simulate(extraction_circuit(three_eq.alphas[k], n_qubits=4),
                       state3)
        worst = max(worst, abs(projection(out, 3).real - want))
    report(4, worst <= 1e-4, f"worst amplitude deviation {worst:.2e}")


def test_criterion_5_spin_chain_verification(three_eq):
    t0 = time.perf_counter()
    # (a) reference parameter rows substituted verbatim
    b0 = np.sqrt(1.0 - three_eq.b @ three_eq.b)
    init = np.concatenate([[b0], three_eq.b, [0.0]]).astype(complex)
    worst_amp = 0.0
    for k, ((d2, d3), omegas, t) in three_eq.chain_rows.items():
        spec = ChainSpec(couplings=(1.0, d2, d3), frequencies=omegas, time=t)
        amp = evolve(spec, init)[3]
        worst_amp = max(worst_amp, abs(amp - three_eq.x[k - 1]))
    # (b) independent parameter search per target
    worst_fit = 0.0
    in_box = True
    for k in (1, 2, 3):
        fit = fit_chain(three_eq.a, k)
        worst_fit = max(worst_fit, fit.residual)
        spec = fit.spec
        in_box &= all(COUPLING_BOUNDS[0] < d < COUPLING_BOUNDS[1]
                      for d in spec.couplings[1:])
        in_box &= all(FREQUENCY_BOUNDS[0] < w < FREQUENCY_BOUNDS[1]
                      for w in spec.frequencies)
    elapsed = time.perf_counter() - t0
    ok = worst_amp <= 1e-3 and worst_fit <= 1e-6 and in_box and elapsed < 120.0
    report(5, ok, f"row amplitude err {worst_amp:.2e}, fit residual "
                  f"{worst_fit:.2e}, in box {in_box}, {elapsed:.0f}s")


def test_criterion_6_bias_recovery_and_correction(three_eq):
    # Hardware-error reproduction is not desk-reproducible; this is the
    # property substitute: inject an affine bias plus jitter over the
    # reference grids and require statistical recovery and correction.
    noise = NoiseModel(intercept=0.40013, slope=-0.70437, jitter_sd=0.02)
    seeds = np.random.SeedSequence(77).spawn(200)
    coeff_hits = 0
    good_points = 0
    total_points = 0
    for seq in seeds:
        rng = np.random.default_rng(seq)
        points = measure_grid(three_eq.a, noise, rng, shots=1024, series=4)
        model = fit_correction([(p.x_sq_true, p.x_sq_measured)
                                for p in points])
        coeff_hits += (abs(model.intercept - 0.40013) <= 0.05
                       and abs(model.slope + 0.70437) <= 0.05)
        rep = error_report([p.x_sq_true for p in points],
                           [p.x_sq_measured for p in points], model)
        mask = rep.true_x_sq >= 0.2 - 1e-9
        good_points += int((np.abs(rep.corrected[mask]) < 0.08).sum())
        total_points += int(mask.sum())
    coeff_rate = coeff_hits / len(seeds)
    corrected_rate = good_points / total_points
    ok = coeff_rate >= 0.95 and corrected_rate >= 0.90
    report(6, ok, f"coefficient recovery {coeff_rate:.1%} of 200 seeds, "
                  f"|corrected err| < 0.08 at {corrected_rate:.1%} of "
                  f"{total_points} grid points with x^2 >= 0.2")


def test_criterion_7_invariant_suites(three_eq):
    rng = np.random.default_rng(90210)
    iz = np.array([bin(i).count("1") for i in range(4)], dtype=float)

    # excitation-number commutation, 1e4 random angle pairs
    worst_comm = 0.0
    for _ in range(10_000):
        alpha, beta = rng.uniform(0, 2 * np.pi, size=2)
        u = circuit_matrix(composite_uij(1, 2, alpha, beta))
        worst_comm = max(worst_comm,
                         np.abs(u * iz[None, :] - iz[:, None] * u).max())

    # one-excitation closure and norm preservation, 1e4 random blocks
    worst_leak = worst_norm = 0.0
    labels = [0, 1, 2, 4]
    for _ in range(10_000):
        i, j = rng.choice([1, 2, 3], size=2, replace=False)
        block = composite_uij(int(i), int(j), rng.uniform(0, 2 * np.pi),
                              rng.uniform(0, 2 * np.pi), n_qubits=3)
        amps = rng.standard_normal(4)
        amps /= np.linalg.norm(amps)
        state = excitation_state(3, amps)
        out = simulate(block, state)
        worst_norm = max(worst_norm,
                         abs(np.linalg.norm(out.amplitudes) - 1.0))
        worst_leak = max(worst_leak, float(np.linalg.norm(
            np.delete(out.amplitudes, labels))))

    # branch independence on the reference system
    worst_branch = 0.0
    sol = solve_extraction(three_eq.a, 2)
    for _ in range(100):
        b = random_encodable_rhs(rng, 3)
        x = classical_solve(LinearSystem(three_eq.a, b))
        amps = [coefficient_probe(three_eq.a, branch) @ x
                for branch in sol.branches]
        worst_branch = max(worst_branch, float(np.ptp(amps)))

    # fit/apply round trip on noiseless affine-biased data
    worst_round = 0.0
    for _ in range(10_000):
        c0, c1 = rng.uniform(-0.5, 0.5), rng.uniform(-0.9, 0.9)
        grid = rng.uniform(0, 1, size=8)
        pts = [(x, x + c0 + c1 * x) for x in grid]
        if np.ptp(grid) < 1e-3:
            continue
        model = fit_correction(pts)
        rep = error_report(grid, [m for _, m in pts], model)
        worst_round = max(worst_round, float(np.abs(rep.corrected).max()))

    ok = (worst_comm <= 1e-12 and worst_leak <= 1e-12
          and worst_norm <= 1e-12 and worst_branch <= 1e-9
          and worst_round <= 1e-9)
    report(7, ok, f"commutator {worst_comm:.1e}, leakage {worst_leak:.1e}, "
                  f"norm drift {worst_norm:.1e}, branch spread "
                  f"{worst_branch:.1e}, round trip {worst_round:.1e}")
