"""Command-line driver wiring problem files to the solver protocols.

Subcommands::

    solve        run a protocol end to end, cross-checked classically
    feasibility  print the embedding/encoding feasibility report
    embed        construct and print an embedding matrix
    calibrate    run the bias-calibration grids and fit the correction line
    chain-fit    search chain parameters solving the system at minimal time

Exit codes: 0 success, 1 problem-file errors, 2 infeasible or singular
inputs, 3 solver non-convergence (or a degenerate fit).

All randomness flows from one ``--seed`` flag (or the problem file's
``seed`` key); sub-streams are derived with ``numpy.random.SeedSequence``
spawning, so outputs (including CSV bytes) are reproducible for fixed
inputs and flags.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .embedding import apply_embedding, embed_full, embed_reduced
from .errors import (DegenerateFit, GramSchmidtDegenerate,
                     InfeasibleEmbedding, NoConvergence, NormTooLarge,
                     ProblemFileError, SingularMatrix)
from .linalg import LinearSystem, classical_solve, feasibility, inverse
from .noise import (CorrectionModel, NoiseModel, apply_correction, calibrate,
                    error_report, measure_grid, measure_with_noise,
                    write_error_table, write_figure_data)
from .problem import ProblemFile, RunReport, VariableResult, load_problem
from .simulator import ground_state, projection, simulate
from .spinchain import evolve, fit_chain, projection_coefficients
from .synthesis import build_full_protocol, readout_site

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFEASIBLE = 2
EXIT_NOCONVERGENCE = 3


def _parse_noise_flag(text: str) -> NoiseModel:
    parts = text.split(",")
    if len(parts) != 3:
        raise ProblemFileError(
            "--noise expects three comma-separated numbers: intercept,slope,sd")
    try:
        a, b, sd = (float(p) for p in parts)
    except ValueError as exc:
        raise ProblemFileError(f"--noise: {exc}") from exc
    return NoiseModel(intercept=a, slope=b, jitter_sd=sd)


def _apply_overrides(problem: ProblemFile, args) -> ProblemFile:
    changes = {}
    if getattr(args, "protocol", None):
        changes["protocol"] = args.protocol
    if getattr(args, "target_k", None):
        changes["target"] = args.target_k
    if getattr(args, "shots", None):
        changes["shots"] = args.shots
    if getattr(args, "series", None):
        changes["series"] = args.series
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "noise", None):
        changes["noise"] = _parse_noise_flag(args.noise)
    if not changes:
        return problem
    fields = {name: getattr(problem, name) for name in (
        "matrix", "rhs", "protocol", "target", "shots", "series", "seed",
        "noise", "chain", "chain_site")}
    fields.update(changes)
    return ProblemFile(**fields)


def _rescale_factors(problem: ProblemFile, targets) -> tuple[float, float]:
    """Scale factors (matrix, rhs) making the requested protocol feasible."""
    inv = inverse(problem.matrix)
    if problem.protocol == "embed-full":
        needed = float(np.linalg.svd(inv, compute_uv=False)[0])
    else:
        needed = max(float(np.linalg.norm(inv[k - 1])) for k in targets)
    c = max(1.0, needed) * (1.0 + 1e-9) if needed > 1.0 else 1.0
    b_norm = float(np.linalg.norm(problem.rhs))
    s = b_norm * (1.0 + 1e-9) if b_norm > 1.0 else 1.0
    return c, s


def _sampled_columns(amp: float, problem: ProblemFile, rng,
                     correction: CorrectionModel | None, mode: str):
    if problem.shots is None:
        return None, None
    record = measure_with_noise(min(1.0, amp * amp),
                                problem.noise or NoiseModel(),
                                shots=problem.shots, series=problem.series,
                                rng=rng)
    sampled = record.p_hat
    corrected = (apply_correction(sampled, correction, mode=mode)
                 if correction is not None else None)
    return sampled, corrected


def cmd_solve(args) -> int:
    problem = _apply_overrides(load_problem(args.problem), args)
    correction = (CorrectionModel.load(args.correction)
                  if args.correction else None)
    t0 = time.perf_counter()
    system = LinearSystem(problem.matrix, problem.rhs)
    feas = feasibility(system)
    m = system.dim
    targets = [problem.target] if problem.target else list(range(1, m + 1))

    c = s = 1.0
    if args.rescale:
        c, s = _rescale_factors(problem, targets)
    a_eff = c * problem.matrix
    b_eff = problem.rhs / s
    scale_back = c * s

    x_classical = classical_solve(system)
    rngs = [np.random.default_rng(child) for child in
            np.random.SeedSequence(problem.seed).spawn(len(targets))]
    diagnostics = []
    results = []

    if problem.protocol == "embed-full":
        emb = embed_full(a_eff)
        y = apply_embedding(emb, b_eff)[:m]
        for k, rng in zip(targets, rngs):
            sampled, corrected = _sampled_columns(abs(y[k - 1]), problem, rng,
                                                  correction, args.mode)
            results.append(VariableResult(
                k=k, x_classical=float(x_classical[k - 1]),
                x_quantum_exact=float(y[k - 1]) * scale_back,
                x_sq_sampled=sampled, x_corrected=corrected))
    elif problem.protocol == "embed-reduced":
        for k, rng in zip(targets, rngs):
            emb = embed_reduced(a_eff, k)
            amp = float(apply_embedding(emb, b_eff)[0])
            sampled, corrected = _sampled_columns(abs(amp), problem, rng,
                                                  correction, args.mode)
            results.append(VariableResult(
                k=k, x_classical=float(x_classical[k - 1]),
                x_quantum_exact=amp * scale_back,
                x_sq_sampled=sampled, x_corrected=corrected))
    elif problem.protocol == "circuit":
        eff_system = LinearSystem(a_eff, b_eff)
        for k, rng in zip(targets, rngs):
            circuit = build_full_protocol(eff_system, k)
            state = simulate(circuit, ground_state(circuit.n_qubits))
            amp = projection(state, readout_site(m)).real
            sampled, corrected = _sampled_columns(abs(amp), problem, rng,
                                                  correction, args.mode)
            results.append(VariableResult(
                k=k, x_classical=float(x_classical[k - 1]),
                x_quantum_exact=amp * scale_back,
                x_sq_sampled=sampled, x_corrected=corrected))
    else:  # chain
        if problem.chain is not None and problem.target is None:
            raise ProblemFileError(
                "a supplied chain spec solves a single variable; set 'target'")
        b0 = np.sqrt(max(0.0, 1.0 - float(b_eff @ b_eff)))
        for k, rng in zip(targets, rngs):
            if problem.chain is not None:
                spec = problem.chain
                site = problem.chain_site or readout_site(m)
                if not (m <= spec.n_sites and 1 <= site <= spec.n_sites):
                    raise ProblemFileError(
                        "chain spec too short for this system/site")
            else:
                fit = fit_chain(a_eff, k)
                spec, site = fit.spec, readout_site(m)
                diagnostics.append(
                    f"k={k}: fitted chain at t={spec.time:g} "
                    f"(residual {fit.residual:.2e}, "
                    f"{fit.restarts_used} restarts)")
            initial = np.zeros(spec.n_sites + 1, dtype=complex)
            initial[0] = b0
            initial[1:m + 1] = b_eff
            amp = evolve(spec, initial)[site]
            res = float(np.abs(
                projection_coefficients(spec, a_eff, site).p
                - np.eye(m)[k - 1]).max())
            if res > 1e-3:
                diagnostics.append(
                    f"k={k}: WARNING chain residual {res:.2e}; amplitude is "
                    "not a clean solution readout")
            if abs(amp.imag) > 1e-6:
                diagnostics.append(
                    f"k={k}: readout amplitude has imaginary part {amp.imag:.2e}")
            sampled, corrected = _sampled_columns(abs(amp), problem, rng,
                                                  correction, args.mode)
            results.append(VariableResult(
                k=k, x_classical=float(x_classical[k - 1]),
                x_quantum_exact=float(amp.real) * scale_back,
                x_sq_sampled=sampled, x_corrected=corrected))

    report = RunReport(protocol=problem.protocol, results=tuple(results),
                       feasibility=feas, elapsed_s=time.perf_counter() - t0,
                       matrix_scale=c, rhs_scale=s,
                       diagnostics=tuple(diagnostics))
    mismatch = report.max_exact_mismatch
    print("\n".join(report.summary_lines()))
    print(f"max |x_quantum_exact - x_classical| = {mismatch:.3e}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_csv(out / "report.csv")
        print(f"wrote {out / 'report.csv'}")
    return EXIT_OK


def cmd_feasibility(args) -> int:
    problem = _apply_overrides(load_problem(args.problem), args)
    system = LinearSystem(problem.matrix, problem.rhs)
    feas = feasibility(system)
    for i, (r, ok) in enumerate(zip(feas.row_norms, feas.feasible_rows), start=1):
        print(f"row {i}: |A^-1 row| = {r:.6f} -> "
              + ("feasible" if ok else "INFEASIBLE"))
    for j, (r, ok) in enumerate(zip(feas.col_norms, feas.feasible_cols), start=1):
        print(f"col {j}: |A^-1 col| = {r:.6f} -> "
              + ("feasible" if ok else "INFEASIBLE"))
    print(f"rhs norm = {feas.b_norm:.6f} -> "
          + ("encodable" if feas.b_encodable else "NOT ENCODABLE"))
    return EXIT_OK


def cmd_embed(args) -> int:
    problem = _apply_overrides(load_problem(args.problem), args)
    if problem.protocol == "embed-reduced":
        if problem.target is None:
            raise ProblemFileError("embed-reduced needs a target variable")
        emb = embed_reduced(problem.matrix, problem.target)
        label = f"reduced embedding (k={problem.target})"
    else:
        emb = embed_full(problem.matrix)
        label = "full block embedding"
    u = emb.u
    ortho = float(np.abs(u @ u.T - np.eye(u.shape[0])).max())
    print(f"{label}: {u.shape[0]} x {u.shape[0]}, "
          f"orthogonality residual {ortho:.2e}")
    for row in u:
        print("  " + " ".join(f"{v:12.8f}" for v in row))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        np.savetxt(out / "embedding.csv", u, delimiter=",", fmt="%.16g")
        print(f"wrote {out / 'embedding.csv'}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    problem = _apply_overrides(load_problem(args.problem), args)
    noise = problem.noise or NoiseModel()
    shots = problem.shots or 1024
    grid_seq, transfer_seq = np.random.SeedSequence(problem.seed).spawn(2)
    result = calibrate(problem.matrix, noise, np.random.default_rng(grid_seq),
                       shots=shots, series=problem.series, mode=args.mode)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.model.save(out / "correction.json")
    write_error_table(out / "error_table.csv", result.ks, result.report)
    write_figure_data(out, result.ks, result.report)
    print(f"fitted correction line: eps = {result.model.intercept:.5f} "
          f"+ ({result.model.slope:.5f}) * x^2 "
          f"(rms residual {result.model.fit_residual_rms:.5f})")
    good = result.report.relative_defined & (result.report.true_x_sq >= 0.2)
    if good.any():
        worst = float(np.abs(result.report.corrected[good]).max())
        print(f"max |corrected error| on x^2 >= 0.2: {worst:.5f}")
    print(f"wrote correction.json, error_table.csv and figure data to {out}")

    if args.transfer:
        transfer = load_problem(args.transfer)
        points = measure_grid(transfer.matrix, noise,
                              np.random.default_rng(transfer_seq),
                              shots=shots, series=problem.series)
        rep = error_report([p.x_sq_true for p in points],
                           [p.x_sq_measured for p in points],
                           result.model, mode=args.mode)
        ks = np.array([p.k for p in points])
        write_error_table(out / "transfer_error_table.csv", ks, rep)
        write_figure_data(out, ks, rep, prefix="transfer_")
        good = rep.relative_defined & (rep.true_x_sq >= 0.2)
        if good.any():
            worst = float(np.abs(rep.corrected[good]).max())
            print(f"transfer: max |corrected error| on x^2 >= 0.2: {worst:.5f}")
    return EXIT_OK


def cmd_chain_fit(args) -> int:
    problem = _apply_overrides(load_problem(args.problem), args)
    m = problem.matrix.shape[0]
    targets = [problem.target] if problem.target else list(range(1, m + 1))
    rows = []
    for k in targets:
        fit = fit_chain(problem.matrix, k)
        spec = fit.spec
        rows.append((k, spec, fit.residual))
        print(f"k={k}: d={spec.couplings[1:]} omega={spec.frequencies} "
              f"t_min={spec.time:g} residual={fit.residual:.2e}")
    if len(rows) > 1:
        # Solving every variable sequentially costs the sum of the
        # per-target minimal times.
        total = sum(spec.time for _, spec, _ in rows)
        print(f"total evolution time across targets: {total:g}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        n = rows[0][1].n_sites
        header = (["k"] + [f"d{i}" for i in range(2, n)]
                  + [f"omega{i}" for i in range(1, n + 1)]
                  + ["t_min", "residual"])
        lines = [",".join(header)]
        for k, spec, res in rows:
            cells = ([str(k)] + [f"{v:.12g}" for v in spec.couplings[1:]]
                     + [f"{v:.12g}" for v in spec.frequencies]
                     + [f"{spec.time:.12g}", f"{res:.3e}"])
            lines.append(",".join(cells))
        (out / "chain_fit.csv").write_text("\n".join(lines) + "\n")
        print(f"wrote {out / 'chain_fit.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlinsys",
        description="Solve small real linear systems through unitary "
                    "embeddings, gate circuits and spin-chain evolution.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, rescale=False):
        p.add_argument("problem", help="YAML problem file")
        p.add_argument("--protocol", choices=(
            "embed-full", "embed-reduced", "circuit", "chain"))
        p.add_argument("--target-k", type=int, help="1-based variable index")
        p.add_argument("--shots", type=int)
        p.add_argument("--series", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--noise", help="intercept,slope,sd")
        p.add_argument("--out-dir")
        p.add_argument("--mode", choices=("invert", "naive"), default="invert",
                       help="correction application mode")
        if rescale:
            p.add_argument("--rescale", action="store_true",
                           help="scale an infeasible system into the "
                                "embeddable region (factors are reported)")

    p_solve = sub.add_parser("solve", help="run a protocol end to end")
    common(p_solve, rescale=True)
    p_solve.add_argument("--correction",
                         help="correction model JSON from 'calibrate'")
    p_solve.set_defaults(func=cmd_solve)

    p_feas = sub.add_parser("feasibility", help="print the feasibility report")
    common(p_feas)
    p_feas.set_defaults(func=cmd_feasibility)

    p_embed = sub.add_parser("embed", help="construct an embedding matrix")
    common(p_embed)
    p_embed.set_defaults(func=cmd_embed)

    p_cal = sub.add_parser("calibrate",
                           help="fit the measurement-bias correction line")
    common(p_cal)
    p_cal.add_argument("--transfer",
                       help="second problem file to correct with the "
                            "fitted model")
    p_cal.set_defaults(func=cmd_calibrate)

    p_chain = sub.add_parser("chain-fit",
                             help="search chain parameters at minimal time")
    common(p_chain)
    p_chain.set_defaults(func=cmd_chain_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "calibrate" and not args.out_dir:
        args.out_dir = "calibration_out"
    try:
        return args.func(args)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SingularMatrix, InfeasibleEmbedding, NormTooLarge,
            GramSchmidtDegenerate) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NoConvergence, DegenerateFit) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NOCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
