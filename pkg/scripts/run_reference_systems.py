#!/usr/bin/env python3
"""Solve the two reference systems through every route and compare.

Prints, per variable, the classical solution next to the amplitudes read
out of the block embedding, the reduced embedding, and the simulated gate
circuit, plus a shot-sampled squared estimate.
"""

import argparse

import numpy as np

from qlinsys.embedding import apply_embedding, embed_full, embed_reduced
from qlinsys.errors import InfeasibleEmbedding
from qlinsys.linalg import LinearSystem, classical_solve, feasibility
from qlinsys.simulator import projection, sample_shots, simulate
from qlinsys.synthesis import build_full_protocol, readout_site

SYSTEMS = {
    "two-eq": (np.array([[-1.8, 0.6], [-0.4, 1.4]]),
               np.array([-0.6, 0.8])),
    "three-eq": (np.array([[0.9, -0.6, -1.8],
                           [1.6, -0.5, -0.6],
                           [0.8, -1.4, -0.5]]),
                 np.array([-0.5, 0.7, -0.5])),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--shots", type=int, default=4096)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    for name, (a, b) in SYSTEMS.items():
        system = LinearSystem(a, b)
        m = system.dim
        x = classical_solve(system)
        feas = feasibility(system)
        print(f"== {name}: rhs norm {feas.b_norm:.5f}, inverse row norms "
              + " ".join(f"{v:.4f}" for v in feas.row_norms))

        try:
            full = apply_embedding(embed_full(a), b)[:m]
        except InfeasibleEmbedding as exc:
            full = None
            print(f"   block embedding unavailable: {exc}")

        print(f"   {'k':>2} {'classical':>12} {'block':>12} "
              f"{'reduced':>12} {'circuit':>12} {'sampled^2':>12}")
        for k in range(1, m + 1):
            reduced = apply_embedding(embed_reduced(a, k), b)[0]
            circ = build_full_protocol(system, k)
            state = simulate(circ)
            amp = projection(state, readout_site(m)).real
            rec = sample_shots(state, readout_site(m), shots=args.shots,
                               seed=args.seed + k)
            block_cell = f"{full[k - 1]:12.8f}" if full is not None else " " * 12
            print(f"   {k:>2} {x[k - 1]:12.8f} {block_cell} "
                  f"{reduced:12.8f} {amp:12.8f} {rec.p_hat:12.8f}")


if __name__ == "__main__":
    main()
