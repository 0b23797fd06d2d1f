"""Dense real linear algebra for small systems.

Everything here works on plain float64 numpy arrays.  Matrices are square,
dense, row-major and capped at dimension 16 (the simulator is the binding
constraint long before that).  Row/column indices in the public API are
1-based, matching the usual cofactor notation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMatrix

MAX_DIM = 16

#: Slack on the <= 1 feasibility comparisons, so exact-boundary cases
#: (e.g. a right-hand side of unit norm) still count as feasible.
FEASIBILITY_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    """Validate and return a square float64 matrix."""
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[0] > MAX_DIM:
        raise ValueError(f"matrix dimension must be in 1..{MAX_DIM}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    return m


def as_vector(b) -> np.ndarray:
    """Validate and return a 1-D float64 vector."""
    v = np.array(b, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError("vector entries must be finite")
    return v


def singularity_cutoff(a: np.ndarray) -> float:
    """Scale-aware determinant cutoff below which a matrix counts as singular."""
    scale = np.abs(a).max()
    return 1e-10 * scale ** a.shape[0]


def determinant(a) -> float:
    """Determinant via LU with partial pivoting (LAPACK)."""
    return float(np.linalg.det(as_matrix(a)))


def minor(a, i: int, j: int) -> float:
    """Determinant of ``a`` with row ``i`` and column ``j`` removed (1-based)."""
    m = as_matrix(a)
    n = m.shape[0]
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"minor indices ({i}, {j}) out of range for dim {n}")
    if n == 1:
        return 1.0
    sub = np.delete(np.delete(m, i - 1, axis=0), j - 1, axis=1)
    return float(np.linalg.det(sub))


def inverse(a) -> np.ndarray:
    m = as_matrix(a)
    det = float(np.linalg.det(m))
    if abs(det) <= singularity_cutoff(m):
        raise SingularMatrix(f"|det| = {abs(det):.3e} is below the cutoff")
    return np.linalg.inv(m)


@dataclass(frozen=True)
class LinearSystem:
    """A problem instance ``a @ x = b`` with a non-singular square matrix."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a)
        b = as_vector(self.b)
        if b.size != a.shape[0]:
            raise ValueError(
                f"matrix dim {a.shape[0]} does not match rhs length {b.size}")
        if abs(np.linalg.det(a)) <= singularity_cutoff(a):
            raise SingularMatrix("coefficient matrix is singular")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        self.a.setflags(write=False)
        self.b.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.a.shape[0]


def classical_solve(sys: LinearSystem) -> np.ndarray:
    """Reference solution of ``a @ x = b``.

    One step of iterative refinement keeps the residual at
    ``||a x - b||_inf <= 1e-12 * (1 + ||b||_inf)`` for well-conditioned
    instances; this is the ground truth every other solve route in the
    library is checked against.
    """
    x = np.linalg.solve(sys.a, sys.b)
    x += np.linalg.solve(sys.a, sys.b - sys.a @ x)
    return x


@dataclass(frozen=True)
class FeasibilityReport:
    """Row/column norms of the inverse matrix and the encodability verdict.

    ``row_norms[k-1]`` is the Euclidean norm of row ``k`` of ``a^-1``; a row
    can be extracted through an orthogonal embedding only when that norm is
    at most 1.  The right-hand side is encodable as probability amplitudes
    only when its Euclidean norm is at most 1.
    """

    row_norms: np.ndarray
    col_norms: np.ndarray
    b_norm: float
    feasible_rows: np.ndarray = field(repr=False)
    b_encodable: bool = True

    @property
    def feasible_cols(self) -> np.ndarray:
        return self.col_norms <= 1.0 + FEASIBILITY_TOL

    @property
    def fully_feasible(self) -> bool:
        """True when every row and column norm admits the block embedding."""
        return bool(self.feasible_rows.all() and self.feasible_cols.all())

    def row_feasible(self, k: int) -> bool:
        return bool(self.feasible_rows[k - 1])


def feasibility(sys: LinearSystem) -> FeasibilityReport:
    inv = inverse(sys.a)
    row_norms = np.linalg.norm(inv, axis=1)
    col_norms = np.linalg.norm(inv, axis=0)
    b_norm = float(np.linalg.norm(sys.b))
    return FeasibilityReport(
        row_norms=row_norms,
        col_norms=col_norms,
        b_norm=b_norm,
        feasible_rows=row_norms <= 1.0 + FEASIBILITY_TOL,
        b_encodable=b_norm <= 1.0 + FEASIBILITY_TOL,
    )


def random_feasible_matrix(rng: np.random.Generator, dim: int,
                           smin: float = 0.3, smax: float = 0.98) -> np.ndarray:
    """Random matrix whose inverse has spectral norm below 1.

    Built as the inverse of ``q1 @ diag(s) @ q2`` with singular values
    ``s`` in ``[smin, smax]``, so every row and column of the inverse has
    norm at most ``smax`` and both embedding routes are guaranteed to exist.
    """
    q1 = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
    q2 = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
    s = rng.uniform(smin, smax, size=dim)
    return np.linalg.inv(q1 @ np.diag(s) @ q2)


def random_encodable_rhs(rng: np.random.Generator, dim: int,
                         max_norm: float = 0.98) -> np.ndarray:
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    return direction * rng.uniform(0.0, max_norm)
