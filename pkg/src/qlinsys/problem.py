"""Problem description files (YAML) and run reports.

A problem file is a single YAML mapping.  Minimal example::

    matrix:
      - [-1.8, 0.6]
      - [-0.4, 1.4]
    rhs: [-0.6, 0.8]
    protocol: circuit          # embed-full | embed-reduced | circuit | chain
    target: 1                  # optional 1-based variable index

Optional keys::

    shots: 1024                # enables shot sampling of the readout qubit
    series: 4
    seed: 7
    noise: {intercept: 0.4, slope: -0.7, jitter: 0.02}
    chain:                     # pre-fitted chain parameters (protocol: chain)
      couplings: [1.0, 1.9261, 1.1005]
      frequencies: [1.8835, -0.8288, -1.059, 0.3756]
      time: 1.51485
      site: 3                  # optional readout site

All numbers are parsed as 64-bit floats.  Unknown keys are rejected so
typos fail loudly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ProblemFileError
from .linalg import FeasibilityReport
from .noise import NoiseModel
from .spinchain import ChainSpec

PROTOCOLS = ("embed-full", "embed-reduced", "circuit", "chain")

_TOP_KEYS = {"matrix", "rhs", "protocol", "target", "shots", "series",
             "seed", "noise", "chain"}
_NOISE_KEYS = {"intercept", "slope", "jitter", "seed"}
_CHAIN_KEYS = {"couplings", "frequencies", "time", "site"}


@dataclass(frozen=True)
class ProblemFile:
    """Validated contents of a problem description file."""

    matrix: np.ndarray
    rhs: np.ndarray
    protocol: str = "circuit"
    target: int | None = None
    shots: int | None = None
    series: int = 4
    seed: int | None = None
    noise: NoiseModel | None = None
    chain: ChainSpec | None = None
    chain_site: int | None = None


def _require(cond: bool, message: str):
    if not cond:
        raise ProblemFileError(message)


def _parse_noise(raw) -> NoiseModel:
    _require(isinstance(raw, dict), "noise must be a mapping")
    unknown = set(raw) - _NOISE_KEYS
    _require(not unknown, f"unknown noise keys: {sorted(unknown)}")
    return NoiseModel(intercept=float(raw.get("intercept", 0.0)),
                      slope=float(raw.get("slope", 0.0)),
                      jitter_sd=float(raw.get("jitter", 0.0)),
                      seed=raw.get("seed"))


def _parse_chain(raw) -> tuple[ChainSpec, int | None]:
    _require(isinstance(raw, dict), "chain must be a mapping")
    unknown = set(raw) - _CHAIN_KEYS
    _require(not unknown, f"unknown chain keys: {sorted(unknown)}")
    for key in ("couplings", "frequencies", "time"):
        _require(key in raw, f"chain section is missing {key!r}")
    try:
        spec = ChainSpec(couplings=[float(v) for v in raw["couplings"]],
                         frequencies=[float(v) for v in raw["frequencies"]],
                         time=float(raw["time"]))
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(f"invalid chain section: {exc}") from exc
    site = raw.get("site")
    return spec, None if site is None else int(site)


def parse_problem(text: str, source: str = "<string>") -> ProblemFile:
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = (f"{source}:{mark.line + 1}:{mark.column + 1}"
                 if mark is not None else source)
        raise ProblemFileError(f"{where}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ProblemFileError(f"{source}: {exc}") from exc

    _require(isinstance(raw, dict), f"{source}: expected a mapping at top level")
    unknown = set(raw) - _TOP_KEYS
    _require(not unknown, f"{source}: unknown keys: {sorted(unknown)}")
    _require("matrix" in raw and "rhs" in raw,
             f"{source}: 'matrix' and 'rhs' are required")
    try:
        matrix = np.array(raw["matrix"], dtype=float)
        rhs = np.array(raw["rhs"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(f"{source}: non-numeric matrix/rhs: {exc}") from exc
    _require(matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1],
             f"{source}: matrix must be square, got shape {matrix.shape}")
    _require(rhs.ndim == 1 and rhs.size == matrix.shape[0],
             f"{source}: rhs length must match the matrix dimension")

    protocol = raw.get("protocol", "circuit")
    _require(protocol in PROTOCOLS,
             f"{source}: protocol must be one of {PROTOCOLS}")
    target = raw.get("target")
    if target is not None:
        target = int(target)
        _require(1 <= target <= matrix.shape[0],
                 f"{source}: target {target} out of range")
    chain, chain_site = (None, None)
    if "chain" in raw:
        chain, chain_site = _parse_chain(raw["chain"])
    shots = raw.get("shots")
    return ProblemFile(
        matrix=matrix, rhs=rhs, protocol=protocol, target=target,
        shots=None if shots is None else int(shots),
        series=int(raw.get("series", 4)),
        seed=raw.get("seed"),
        noise=_parse_noise(raw["noise"]) if "noise" in raw else None,
        chain=chain, chain_site=chain_site,
    )


def load_problem(path) -> ProblemFile:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    return parse_problem(text, source=str(path))


@dataclass(frozen=True)
class VariableResult:
    """Solution record for one variable."""

    k: int
    x_classical: float
    x_quantum_exact: float | None = None
    x_sq_sampled: float | None = None
    x_corrected: float | None = None

    @property
    def exact_mismatch(self) -> float:
        if self.x_quantum_exact is None:
            return 0.0
        return abs(self.x_quantum_exact - self.x_classical)

    @property
    def corrected_negative(self) -> bool:
        return self.x_corrected is not None and self.x_corrected < 0


@dataclass(frozen=True)
class RunReport:
    """Everything a solve run produced, for printing and CSV export."""

    protocol: str
    results: tuple[VariableResult, ...]
    feasibility: FeasibilityReport
    elapsed_s: float
    matrix_scale: float = 1.0
    rhs_scale: float = 1.0
    diagnostics: tuple[str, ...] = ()

    @property
    def rescaled(self) -> bool:
        return self.matrix_scale != 1.0 or self.rhs_scale != 1.0

    @property
    def max_exact_mismatch(self) -> float:
        return max((r.exact_mismatch for r in self.results), default=0.0)

    def write_csv(self, path) -> None:
        def fmt(v):
            if v is None:
                return ""
            return f"{v:.12g}"

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "x_classical", "x_quantum_exact",
                             "x_sq_sampled", "x_corrected"])
            for r in self.results:
                writer.writerow([r.k, fmt(r.x_classical), fmt(r.x_quantum_exact),
                                 fmt(r.x_sq_sampled), fmt(r.x_corrected)])

    def summary_lines(self) -> list[str]:
        lines = [f"protocol: {self.protocol}"]
        if self.rescaled:
            lines.append(
                f"RESCALED: matrix scale {self.matrix_scale:.9g}, rhs scale "
                f"{self.rhs_scale:.9g} (reported x already multiplied back)")
        feas = self.feasibility
        lines.append("inverse row norms: "
                     + " ".join(f"{v:.5f}" for v in feas.row_norms))
        lines.append("inverse col norms: "
                     + " ".join(f"{v:.5f}" for v in feas.col_norms))
        lines.append(f"rhs norm: {feas.b_norm:.5f} "
                     f"(encodable: {feas.b_encodable})")
        header = f"{'k':>3} {'classical':>14} {'quantum':>14} " \
                 f"{'sampled x^2':>14} {'corrected':>14}"
        lines.append(header)
        for r in self.results:
            def cell(v):
                return "-".rjust(14) if v is None or (
                    isinstance(v, float) and math.isnan(v)) else f"{v:14.9f}"
            lines.append(f"{r.k:>3} {cell(r.x_classical)} "
                         f"{cell(r.x_quantum_exact)} {cell(r.x_sq_sampled)} "
                         f"{cell(r.x_corrected)}"
                         + ("  [negative corrected]" if r.corrected_negative else ""))
        lines.extend(self.diagnostics)
        lines.append(f"elapsed: {self.elapsed_s:.3f}s")
        return lines
