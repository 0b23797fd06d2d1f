#!/usr/bin/env python3
"""Bias-calibration experiment over the solution grids.

Injects an affine measurement bias plus per-series jitter, measures the
per-variable grids with the circuit protocol, fits the correction line and
writes the error tables.  With --transfer, the fitted model is applied
unchanged to a second matrix to check that the correction carries over.
Optionally plots the three error figures with matplotlib.
"""

import argparse
from pathlib import Path

import numpy as np

from qlinsys.noise import (NoiseModel, calibrate, error_report, measure_grid,
                           write_error_table, write_figure_data)

REFERENCE = np.array([[0.9, -0.6, -1.8],
                      [1.6, -0.5, -0.6],
                      [0.8, -1.4, -0.5]])
TRANSFER = 2.0 / 3.0 * np.array([[-1.43, -1.10, -1.06],
                                 [0.818, 0.367, -1.42],
                                 [-0.392, 1.60, -0.654]])


def plot(report, out_dir, prefix=""):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = [("raw error", report.raw, None),
              ("corrected error", report.corrected, 0.08),
              ("relative corrected error", report.relative, None)]
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
    for ax, (label, series, band) in zip(axes, panels):
        mask = (report.relative_defined if label.startswith("relative")
                else np.ones_like(series, dtype=bool))
        ax.scatter(report.true_x_sq[mask], series[mask], s=14)
        ax.axhline(0.0, color="grey", lw=0.6)
        if band:
            ax.axhline(band, color="red", lw=0.6, ls="--")
            ax.axhline(-band, color="red", lw=0.6, ls="--")
        ax.set_xlabel("x^2")
        ax.set_title(label)
    fig.tight_layout()
    fig.savefig(Path(out_dir) / f"{prefix}errors.png", dpi=150)
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--intercept", type=float, default=0.40013)
    parser.add_argument("--slope", type=float, default=-0.70437)
    parser.add_argument("--jitter", type=float, default=0.02)
    parser.add_argument("--shots", type=int, default=1024)
    parser.add_argument("--series", type=int, default=4)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out-dir", default="calibration_out")
    parser.add_argument("--transfer", action="store_true",
                        help="also correct the pseudorandom second matrix")
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args()

    noise = NoiseModel(args.intercept, args.slope, args.jitter)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid_seq, transfer_seq = np.random.SeedSequence(args.seed).spawn(2)

    result = calibrate(REFERENCE, noise, np.random.default_rng(grid_seq),
                       shots=args.shots, series=args.series)
    result.model.save(out / "correction.json")
    write_error_table(out / "error_table.csv", result.ks, result.report)
    write_figure_data(out, result.ks, result.report)
    print(f"injected: eps = {args.intercept:.5f} + ({args.slope:.5f}) x^2, "
          f"jitter sd {args.jitter}")
    print(f"fitted:   eps = {result.model.intercept:.5f} + "
          f"({result.model.slope:.5f}) x^2")
    mask = result.report.true_x_sq >= 0.2
    print(f"max |corrected error| at x^2 >= 0.2: "
          f"{np.abs(result.report.corrected[mask]).max():.5f}")
    if args.plot:
        plot(result.report, out)

    if args.transfer:
        points = measure_grid(TRANSFER, noise,
                              np.random.default_rng(transfer_seq),
                              shots=args.shots, series=args.series)
        rep = error_report([p.x_sq_true for p in points],
                           [p.x_sq_measured for p in points], result.model)
        ks = np.array([p.k for p in points])
        write_error_table(out / "transfer_error_table.csv", ks, rep)
        write_figure_data(out, ks, rep, prefix="transfer_")
        mask = rep.true_x_sq >= 0.2
        print(f"transfer matrix, same model: max |corrected error| at "
              f"x^2 >= 0.2: {np.abs(rep.corrected[mask]).max():.5f}")
        if args.plot:
            plot(rep, out, prefix="transfer_")
    print(f"outputs in {out}/")


if __name__ == "__main__":
    main()
