"""Measurement-bias emulation, correction fitting and error bookkeeping.

Shot-sampled protocol runs estimate a squared amplitude ``x~^2`` whose
systematic deviation from the true ``x^2`` is, on real devices, well
described by a straight line in ``x^2``.  This module emulates such a bias
(affine distortion of the Bernoulli probability plus Gaussian jitter per
measurement series), fits the correction line by least squares over a grid
of known solutions, and applies/reports the corrected values the same way
a hardware calibration would.

Correction modes: the fitted line is a function of the unknown true
``x^2``, so applying it to fresh data needs a stand-in.  Mode ``"invert"``
solves the affine relation exactly, ``x^2 = (x~^2 - c0) / (1 + c1)``, and
is the default; mode ``"naive"`` substitutes the measured value into the
line, ``X = x~^2 - (c0 + c1 x~^2)``, and is kept as a documented
compatibility reading.  Corrected values are never clamped: negative
results are reported as-is so miscalibration stays visible.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import DegenerateFit
from .linalg import LinearSystem, as_matrix, classical_solve, inverse
from .simulator import ShotRecord, projection, simulate
from .synthesis import (encoding_circuit, extraction_circuit, readout_site,
                        solve_encoding, solve_extraction)

#: Default shot plan: series x shots per series.
DEFAULT_SHOTS = 1024
DEFAULT_SERIES = 4


@dataclass(frozen=True)
class NoiseModel:
    """Affine probability distortion with per-series Gaussian jitter."""

    intercept: float = 0.0
    slope: float = 0.0
    jitter_sd: float = 0.0
    seed: int | None = None

    def distorted(self, true_p: float, rng: np.random.Generator) -> float:
        p = true_p + self.intercept + self.slope * true_p
        if self.jitter_sd > 0.0:
            p += rng.normal(0.0, self.jitter_sd)
        return float(np.clip(p, 0.0, 1.0))

    @property
    def is_zero(self) -> bool:
        return self.intercept == 0.0 and self.slope == 0.0 and self.jitter_sd == 0.0


def measure_with_noise(true_p: float, model: NoiseModel,
                       shots: int = DEFAULT_SHOTS, series: int = DEFAULT_SERIES,
                       rng: np.random.Generator | None = None) -> ShotRecord:
    """Binomial shot counts per series at the distorted probability."""
    if not 0.0 <= true_p <= 1.0:
        raise ValueError(f"probability {true_p} outside [0, 1]")
    if rng is None:
        rng = np.random.default_rng(model.seed)
    runs = []
    for _ in range(series):
        p = model.distorted(true_p, rng)
        runs.append((shots, int(rng.binomial(shots, p))))
    return ShotRecord(series=tuple(runs))


@dataclass(frozen=True)
class CorrectionModel:
    """Least-squares line ``eps = intercept + slope * x^2`` of the bias."""

    intercept: float
    slope: float
    fit_residual_rms: float = 0.0

    def predicted_error(self, x_sq: float) -> float:
        return self.intercept + self.slope * x_sq

    def save(self, path) -> None:
        Path(path).write_text(json.dumps({
            "intercept": self.intercept,
            "slope": self.slope,
            "fit_residual_rms": self.fit_residual_rms,
        }, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "CorrectionModel":
        data = json.loads(Path(path).read_text())
        return cls(intercept=float(data["intercept"]), slope=float(data["slope"]),
                   fit_residual_rms=float(data.get("fit_residual_rms", 0.0)))


def fit_correction(points) -> CorrectionModel:
    """Fit the error line from ``(x^2, measured x~^2)`` pairs."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise DegenerateFit("need at least three (x^2, measured) points")
    x_sq, measured = pts[:, 0], pts[:, 1]
    if np.ptp(x_sq) < 1e-12:
        raise DegenerateFit("all abscissae coincide; the line is undetermined")
    eps = measured - x_sq
    design = np.column_stack([np.ones_like(x_sq), x_sq])
    coef, *_ = np.linalg.lstsq(design, eps, rcond=None)
    rms = float(np.sqrt(np.mean((eps - design @ coef) ** 2)))
    return CorrectionModel(intercept=float(coef[0]), slope=float(coef[1]),
                           fit_residual_rms=rms)


def apply_correction(x_tilde_sq: float, model: CorrectionModel,
                     mode: str = "invert") -> float:
    """Corrected squared amplitude (not clamped; may be negative)."""
    if mode == "invert":
        gain = 1.0 + model.slope
        if abs(gain) > 1e-6:
            return (x_tilde_sq - model.intercept) / gain
        mode = "naive"  # fall back when the line has slope -1
    if mode != "naive":
        raise ValueError(f"unknown correction mode {mode!r}")
    return x_tilde_sq - model.predicted_error(x_tilde_sq)


@dataclass(frozen=True)
class ErrorReport:
    """Raw, corrected and relative errors per data point.

    Relative errors are undefined at ``x^2 = 0`` (they diverge); those
    entries hold ``inf`` and are excluded from every summary through the
    ``relative_defined`` mask.
    """

    true_x_sq: np.ndarray = field(repr=False)
    measured_x_sq: np.ndarray = field(repr=False)
    raw: np.ndarray = field(repr=False)
    corrected: np.ndarray = field(repr=False)
    relative: np.ndarray = field(repr=False)
    relative_defined: np.ndarray = field(repr=False)

    @property
    def corrected_values(self) -> np.ndarray:
        return self.true_x_sq + self.corrected

    @property
    def any_negative_corrected(self) -> bool:
        return bool((self.corrected_values < 0).any())


def error_report(true_x_sq, measured, model: CorrectionModel,
                 mode: str = "invert") -> ErrorReport:
    """All three error series against the known truth."""
    truth = np.asarray(true_x_sq, dtype=float)
    meas = np.asarray(measured, dtype=float)
    if truth.shape != meas.shape:
        raise ValueError("truth and measurement arrays are misaligned")
    raw = meas - truth
    corrected = np.array([apply_correction(v, model, mode=mode) for v in meas])
    eps_corr = corrected - truth
    defined = truth > 0
    relative = np.full_like(truth, np.inf)
    relative[defined] = eps_corr[defined] / truth[defined]
    return ErrorReport(true_x_sq=truth, measured_x_sq=meas, raw=raw,
                       corrected=eps_corr, relative=relative,
                       relative_defined=defined)


# -- calibration over solution grids ----------------------------------------

def grid_values(a, k: int, step: float = 0.1) -> np.ndarray:
    """Grid of target ``x_k^2`` values: multiples of ``step`` up to the
    largest value reachable with an encodable rhs (the squared norm of row
    ``k`` of the inverse)."""
    row_norm = float(np.linalg.norm(inverse(as_matrix(a))[k - 1]))
    n_max = int(np.floor(row_norm ** 2 / step + 1e-9))
    return step * np.arange(0, n_max + 1)


def sample_solution_with_component(a, k: int, value: float,
                                   rng: np.random.Generator) -> np.ndarray:
    """Solution vector with ``x_k = value`` and an encodable rhs.

    The remaining components are drawn uniformly over the exact feasible
    set: the rhs is split into the minimal-norm part fixing ``x_k`` plus a
    uniform draw from the orthogonal-complement ball (rejection-sampled
    from its bounding cube).
    """
    mat = as_matrix(a)
    row = inverse(mat)[k - 1]
    row_norm = float(np.linalg.norm(row))
    if abs(value) > row_norm + 1e-12:
        raise ValueError(f"|x_{k}| = {abs(value):.4f} unreachable; "
                         f"max is {row_norm:.4f}")
    b_par = value * row / row_norm ** 2
    radius = np.sqrt(max(0.0, 1.0 - (value / row_norm) ** 2))
    # Orthonormal basis of the complement of `row`.
    q = np.linalg.qr(np.column_stack([row / row_norm,
                                      np.eye(mat.shape[0])]))[0][:, 1:mat.shape[0]]
    while True:
        u = rng.uniform(-1.0, 1.0, size=q.shape[1])
        if u @ u <= 1.0:
            break
    b = b_par + radius * (q @ u)
    x = np.linalg.solve(mat, b)
    x[k - 1] = value  # exact by construction; pin against round-off
    return x


@dataclass(frozen=True)
class CalibrationPoint:
    k: int
    x_sq_true: float
    x_sq_measured: float


@dataclass(frozen=True)
class CalibrationResult:
    points: tuple[CalibrationPoint, ...]
    model: CorrectionModel
    report: ErrorReport

    @property
    def ks(self) -> np.ndarray:
        return np.array([p.k for p in self.points])


@lru_cache(maxsize=128)
def _extraction_angles(matrix_bytes: bytes, m: int, k: int) -> tuple[float, ...]:
    # Extraction angles depend on the matrix only, so calibration sweeps
    # repeating the same matrix across many seeds solve them once.
    mat = np.frombuffer(matrix_bytes).reshape(m, m)
    return solve_extraction(mat, k).alphas


def measure_grid(a, noise: NoiseModel, rng: np.random.Generator,
                 shots: int = DEFAULT_SHOTS, series: int = DEFAULT_SERIES,
                 grid_step: float = 0.1) -> tuple[CalibrationPoint, ...]:
    """Run the circuit protocol over the per-variable grids with noisy shots."""
    mat = as_matrix(a)
    m = mat.shape[0]
    points = []
    for k in range(1, m + 1):
        ext = extraction_circuit(_extraction_angles(mat.tobytes(), m, k),
                                 n_qubits=m + 1)
        for x_sq in grid_values(mat, k, step=grid_step):
            x = sample_solution_with_component(mat, k, np.sqrt(x_sq), rng)
            sys = LinearSystem(mat, mat @ x)
            enc = solve_encoding(sys.b)
            circuit = encoding_circuit(enc.betas, n_qubits=m + 1) + ext
            amp = projection(simulate(circuit), readout_site(m))
            record = measure_with_noise(min(1.0, abs(amp) ** 2), noise,
                                        shots=shots, series=series, rng=rng)
            # The constructed solution has x_k = sqrt(x_sq) exactly; the
            # classical re-solve only cross-checks the construction.
            assert abs(classical_solve(sys)[k - 1] ** 2 - x_sq) < 1e-9
            points.append(CalibrationPoint(k=k, x_sq_true=float(x_sq),
                                           x_sq_measured=record.p_hat))
    return tuple(points)


def calibrate(a, noise: NoiseModel, rng: np.random.Generator,
              shots: int = DEFAULT_SHOTS, series: int = DEFAULT_SERIES,
              mode: str = "invert") -> CalibrationResult:
    """Measure the grids, fit the correction line and report all errors."""
    points = measure_grid(a, noise, rng, shots=shots, series=series)
    model = fit_correction([(p.x_sq_true, p.x_sq_measured) for p in points])
    report = error_report([p.x_sq_true for p in points],
                          [p.x_sq_measured for p in points], model, mode=mode)
    return CalibrationResult(points=tuple(points), model=model, report=report)


# -- CSV emission ------------------------------------------------------------

def _fmt(value: float) -> str:
    return f"{value:.12g}"


def write_error_table(path, ks, report: ErrorReport) -> None:
    """Combined error table: k, x_sq_true, x_sq_measured, eps, eps_corr, eps_rel."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "x_sq_true", "x_sq_measured",
                         "eps", "eps_corr", "eps_rel"])
        for i, k in enumerate(ks):
            writer.writerow([
                int(k), _fmt(report.true_x_sq[i]), _fmt(report.measured_x_sq[i]),
                _fmt(report.raw[i]), _fmt(report.corrected[i]),
                _fmt(report.relative[i]),
            ])


def write_figure_data(out_dir, ks, report: ErrorReport, prefix: str = "") -> list[str]:
    """Per-figure plot files: raw, corrected and relative errors vs x^2."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    per_figure = [
        ("errors_raw.csv", report.raw, np.ones_like(report.raw, dtype=bool)),
        ("errors_corrected.csv", report.corrected,
         np.ones_like(report.corrected, dtype=bool)),
        ("errors_relative.csv", report.relative, report.relative_defined),
    ]
    for name, series, mask in per_figure:
        fname = prefix + name
        with open(out / fname, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "x_sq_true", "value"])
            for i, k in enumerate(ks):
                if mask[i]:
                    writer.writerow([int(k), _fmt(report.true_x_sq[i]),
                                     _fmt(series[i])])
        names.append(fname)
    return names
