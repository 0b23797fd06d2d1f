"""Angle synthesis for the encoding and extraction circuits.

The protocol for an M-equation system runs on M+1 qubits:

* an encoding stage ``Ry(1, beta_1)`` followed by the excitation-conserving
  blocks ``U_{i,i+1}(beta_{i+1})``, i = 1..M-1, which writes the rhs vector
  onto the one-excitation amplitudes ``|1>..|M>`` (ground amplitude
  ``sqrt(1 - |b|^2)``);
* an extraction stage ``U_{12}(alpha_1) ... U_{M,M+1}(alpha_M)`` tuned so
  that the amplitude of ``|M>`` afterwards equals the chosen solution
  component ``x_k``.

Writing the readout amplitude as ``sum_j D_j(alpha) x_j``, the extraction
angles solve ``D(alpha) = e_k``.  For two equations the conditions have
closed-form solutions; in general they are solved by multi-start damped
Newton iteration on the numerically probed coefficients.  Angle solutions
are not unique; all converged branches are kept and the lexicographically
smallest (wrapped to [0, 2pi)) is reported as canonical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleEmbedding, NoConvergence, NormTooLarge
from .linalg import FEASIBILITY_TOL, LinearSystem, as_matrix, as_vector, inverse
from .simulator import GateCircuit, Ry, composite_uij

RESIDUAL_TOL = 1e-9
#: Multi-start budget and per-start iteration cap for the Newton solver.
RESTARTS = 64
MAX_ITER = 200
FD_STEP = 1e-6
#: Angles closer than this (mod 2pi) count as the same branch.
BRANCH_GRANULARITY = 1e-6

TWO_PI = 2.0 * math.pi


def readout_site(dim: int) -> int:
    """Excitation label carrying the solution amplitude for ``dim`` equations."""
    return dim


def encoding_circuit(betas, n_qubits: int | None = None) -> GateCircuit:
    """Gate sequence preparing the rhs amplitudes from the ground state."""
    betas = tuple(float(x) for x in betas)
    m = len(betas)
    n = n_qubits if n_qubits is not None else m
    gates = [Ry(1, betas[0])]
    for i in range(1, m):
        gates.extend(composite_uij(i, i + 1, betas[i], n_qubits=n).gates)
    return GateCircuit(n, tuple(gates))


def extraction_circuit(alphas, n_qubits: int | None = None) -> GateCircuit:
    """Chain of nearest-neighbour blocks routing the solution to ``|M>``."""
    alphas = tuple(float(x) for x in alphas)
    m = len(alphas)
    n = n_qubits if n_qubits is not None else m + 1
    gates = []
    for i, alpha in enumerate(alphas, start=1):
        gates.extend(composite_uij(i, i + 1, alpha, n_qubits=n).gates)
    return GateCircuit(n, tuple(gates))


# -- fast one-excitation propagation ----------------------------------------
#
# Every block U_{i,i+1}(angle) acts on the one-excitation coordinates
# (i, i+1) as the reflection [[-sin, cos], [cos, sin]] and leaves the ground
# amplitude alone, so whole chains reduce to products of 2x2 updates.  The
# equivalence with the full statevector simulation is pinned by tests.

def _chain_block(alphas, size: int) -> np.ndarray:
    """One-excitation matrix (sites 1..size) of the extraction chain."""
    w = np.eye(size)
    for i, alpha in enumerate(alphas):
        s, c = math.sin(alpha), math.cos(alpha)
        rows = w[[i, i + 1], :]
        w[[i, i + 1], :] = np.array([[-s, c], [c, s]]) @ rows
    return w


def encoded_amplitudes(betas) -> np.ndarray:
    """Amplitudes over (ground, |1>..|M>) produced by the encoding stage."""
    betas = np.asarray(betas, dtype=float)
    m = betas.size
    v = np.zeros(m + 1)
    half = betas[0] / 2
    v[0], v[1] = math.cos(half), -math.sin(half)
    for i in range(1, m):
        s, c = math.sin(betas[i]), math.cos(betas[i])
        v[i], v[i + 1] = -s * v[i] + c * v[i + 1], c * v[i] + s * v[i + 1]
    return v


def coefficient_probe(a, alphas, site: int | None = None) -> np.ndarray:
    """Coefficients D with ``<site|Psi> = sum_j D_j x_j`` for given angles.

    Probed numerically from the one-excitation action of the chain: row
    ``site`` of the chain block, right-multiplied by the system matrix.
    No closed forms are assumed beyond excitation conservation.
    """
    mat = as_matrix(a)
    m = mat.shape[0]
    alphas = tuple(float(x) for x in alphas)
    if len(alphas) != m:
        raise ValueError(f"expected {m} extraction angles, got {len(alphas)}")
    if site is None:
        site = readout_site(m)
    w = _chain_block(alphas, m + 1)
    return w[site - 1, :m] @ mat


@dataclass(frozen=True)
class EncodingSolution:
    """Angles whose encoding stage reproduces the rhs amplitudes."""

    betas: tuple[float, ...]
    residual: float
    ground_amplitude: float


@dataclass(frozen=True)
class ExtractionSolution:
    """Angles steering solution component ``k`` onto the readout state."""

    k: int
    alphas: tuple[float, ...]
    residual: float
    branches: tuple[tuple[float, ...], ...] = ()


def _wrap(angle: float) -> float:
    return angle % TWO_PI


def _dedup_branches(branches, wrap: bool = True):
    # Wrapping to [0, 2pi) is only sound for the composite blocks; the bare
    # first encoding rotation is 4pi-periodic, so encoding branches are
    # deduplicated on raw values instead.
    seen = {}
    for angles in branches:
        if wrap:
            angles = tuple(_wrap(a) for a in angles)
        key = tuple(round(a / BRANCH_GRANULARITY) for a in angles)
        seen.setdefault(key, tuple(angles))
    return sorted(seen.values())


def _newton(fun, x0, tol=RESIDUAL_TOL, max_iter=MAX_ITER, step=FD_STEP):
    """Damped Newton with central-difference Jacobian.  Returns (x, ok)."""
    x = np.array(x0, dtype=float)
    f = fun(x)
    for _ in range(max_iter):
        if np.abs(f).max() <= tol:
            return x, True
        jac = np.empty((f.size, x.size))
        for d in range(x.size):
            e = np.zeros(x.size)
            e[d] = step
            jac[:, d] = (fun(x + e) - fun(x - e)) / (2 * step)
        try:
            delta = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(jac, -f, rcond=None)[0]
        norm_f = np.linalg.norm(f)
        lam = 1.0
        while lam > 2 ** -20:
            trial = x + lam * delta
            f_trial = fun(trial)
            if np.linalg.norm(f_trial) < norm_f:
                x, f = trial, f_trial
                break
            lam /= 2
        else:
            return x, bool(np.abs(f).max() <= tol)
    return x, bool(np.abs(fun(x)).max() <= tol)


def _multi_start(fun, n_params, seeds=(), restarts=RESTARTS, tol=RESIDUAL_TOL,
                 wrap: bool = True):
    """Collect all converged roots from seeded plus random starts."""
    rng = np.random.default_rng(20200828)  # fixed: reproducible branches
    roots = []
    starts = list(seeds)
    while len(starts) < restarts:
        starts.append(rng.uniform(0.0, TWO_PI, size=n_params))
    for x0 in starts:
        x, ok = _newton(fun, x0, tol=tol)
        if ok:
            roots.append(tuple(x))
    return _dedup_branches(roots, wrap=wrap)


def _closed_form_betas(b: np.ndarray) -> np.ndarray:
    """Backward recursion for the encoding angles (any dimension).

    ``tail[i]`` is the amplitude left on site i+1 before block i+1 acts;
    the last site must receive ``-b_M``, every earlier site splits off
    ``b_i`` via ``sin``.
    """
    m = b.size
    tail = np.zeros(m)
    tail[m - 1] = -b[m - 1]
    for i in range(m - 2, -1, -1):
        tail[i] = math.hypot(b[i], tail[i + 1])
    betas = np.zeros(m)
    s1 = min(1.0, tail[0])
    betas[0] = 2.0 * math.atan2(s1, math.sqrt(max(0.0, 1.0 - s1 * s1)))
    for i in range(m - 1):
        betas[i + 1] = math.atan2(b[i], tail[i + 1]) if tail[i] > 0 else 0.0
    return betas


def solve_encoding(b) -> EncodingSolution:
    """Angles whose encoding stage carries ``b`` on the one-excitation states.

    Requires ``|b| <= 1``.  The canonical branch has a non-negative ground
    amplitude ``sqrt(1 - |b|^2)`` and ``beta_1`` in ``[0, pi]``.
    """
    vec = as_vector(b)
    m = vec.size
    norm = float(np.linalg.norm(vec))
    if norm > 1.0 + FEASIBILITY_TOL:
        raise NormTooLarge(f"rhs norm {norm:.6f} exceeds 1; not encodable")

    def residual_vec(betas):
        return encoded_amplitudes(betas)[1:] - vec

    betas = _closed_form_betas(vec)
    if np.abs(residual_vec(betas)).max() > RESIDUAL_TOL:
        branches = _multi_start(residual_vec, m, seeds=[betas], wrap=False)
        usable = [br for br in branches
                  if encoded_amplitudes(br)[0] >= -FEASIBILITY_TOL]
        if not usable:
            raise NoConvergence(
                "encoding angle search exhausted its restarts (inconclusive)")
        betas = np.array(usable[0])
    amps = encoded_amplitudes(betas)
    res = float(np.abs(amps[1:] - vec).max())
    wrapped = (betas[0],) + tuple(_wrap(x) for x in betas[1:])
    return EncodingSolution(betas=wrapped, residual=res,
                            ground_amplitude=float(amps[0]))


def _closed_form_alphas(mat: np.ndarray, k: int):
    """Both sign branches of the two-equation extraction conditions."""
    (a11, a12), (a21, a22) = mat
    first = math.atan2(-a12, a22) if k == 1 else math.atan2(-a11, a21)
    candidates = []
    for alpha1 in (first, first + math.pi):
        c, s = math.cos(alpha1), math.sin(alpha1)
        lead = (a11 * c + a21 * s) if k == 1 else (a12 * c + a22 * s)
        target = -1.0 / lead
        if abs(target) > 1.0 + 1e-9:
            continue
        phi = math.asin(max(-1.0, min(1.0, target)))
        for alpha2 in (phi, math.pi - phi):
            candidates.append((alpha1, alpha2))
    return candidates


def solve_extraction(a, k: int, restarts: int = RESTARTS) -> ExtractionSolution:
    """Angles making the probed coefficients equal the k-th unit vector.

    Feasible only when row ``k`` of the inverse has norm at most 1, because
    the chain block row is a unit row of an orthogonal matrix.  Exhausted
    restarts raise NoConvergence (inconclusive, not proof of infeasibility).
    Lowering ``restarts`` trades branch coverage for speed; the canonical
    branch may change with it.
    """
    mat = as_matrix(a)
    m = mat.shape[0]
    if not 1 <= k <= m:
        raise IndexError(f"target index {k} out of range for dim {m}")
    row_norm = float(np.linalg.norm(inverse(mat)[k - 1]))
    if row_norm > 1.0 + FEASIBILITY_TOL:
        raise InfeasibleEmbedding(
            f"row {k} of the inverse has norm {row_norm:.6f} > 1; the "
            "readout coefficients cannot reach a unit vector")

    target = np.zeros(m)
    target[k - 1] = 1.0

    def residual_vec(alphas):
        return coefficient_probe(mat, alphas) - target

    seeds = []
    if m == 2:
        seeds = [np.array(c) for c in _closed_form_alphas(mat, k)]
    branches = _multi_start(residual_vec, m, seeds=seeds, restarts=restarts)
    if not branches:
        raise NoConvergence(
            f"extraction angle search for k={k} exhausted its restarts "
            "(inconclusive)")
    canonical = branches[0]
    res = float(np.abs(residual_vec(np.array(canonical))).max())
    return ExtractionSolution(k=k, alphas=canonical, residual=res,
                              branches=tuple(branches))


def build_full_protocol(sys: LinearSystem, k: int) -> GateCircuit:
    """Encoding stage followed by the extraction stage on M+1 qubits.

    Simulating the returned circuit from the ground state puts ``x_k`` on
    the amplitude of ``|M>``.
    """
    m = sys.dim
    enc = solve_encoding(sys.b)
    ext = solve_extraction(sys.a, k)
    return (encoding_circuit(enc.betas, n_qubits=m + 1)
            + extraction_circuit(ext.alphas, n_qubits=m + 1))
