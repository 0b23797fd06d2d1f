"""Orthogonal matrices that carry the rows of an inverse matrix.

Two constructions are provided for a feasible M x M system matrix ``a``:

* ``embed_full``    -- a 2M x 2M orthogonal matrix whose top-left M x M
  block is ``a^-1``, so applying it to ``(b, 0)`` returns the full solution
  in the first M coordinates.
* ``embed_reduced`` -- an (M+1) x (M+1) orthogonal matrix whose first row
  is row ``k`` of ``a^-1`` followed by the norm-completing entry
  ``sqrt(1 - |row|^2)``; applying it to ``(b, 0)`` returns ``x_k`` in the
  first coordinate.

Only the designated block/row is fixed by the problem; the remaining rows
are completed deterministically (Cholesky factor for the row-norm
completion, then Gram-Schmidt over the canonical basis) so repeated runs
produce identical matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GramSchmidtDegenerate, InfeasibleEmbedding
from .linalg import FEASIBILITY_TOL, as_matrix, as_vector, inverse

#: Candidate completion vectors with residual norm below this are skipped.
DROP_TOL = 1e-8


@dataclass(frozen=True)
class FullEmbedding:
    """2M x 2M orthogonal matrix with ``a^-1`` as its top-left block."""

    u: np.ndarray
    m: int

    @property
    def dim(self) -> int:
        return 2 * self.m


@dataclass(frozen=True)
class ReducedEmbedding:
    """(M+1) x (M+1) orthogonal matrix encoding one row of ``a^-1``."""

    u: np.ndarray
    k: int

    @property
    def dim(self) -> int:
        return self.u.shape[0]


def _orthonormal_complement_rows(rows: np.ndarray, candidates: np.ndarray,
                                 count: int) -> np.ndarray:
    """Extend orthonormal ``rows`` by ``count`` vectors drawn from ``candidates``.

    Classical Gram-Schmidt with a second re-orthogonalization pass; near-
    dependent candidates (residual below DROP_TOL) are skipped.
    """
    basis = [r for r in rows]
    added = []
    for cand in candidates:
        if len(added) == count:
            break
        v = cand.astype(float).copy()
        for _ in range(2):
            for r in basis:
                v -= (r @ v) * r
        norm = np.linalg.norm(v)
        if norm < DROP_TOL:
            continue
        v /= norm
        basis.append(v)
        added.append(v)
    if len(added) < count:
        raise GramSchmidtDegenerate(
            f"could not complete the basis: got {len(added)} of {count} rows")
    return np.array(added)


def _row_completion_block(binv: np.ndarray) -> np.ndarray:
    """Lower-triangular C with ``C C^T = I - binv binv^T``.

    Appending C to ``binv`` makes the first M rows orthonormal.  The row and
    column norm conditions alone do not force ``I - binv binv^T`` to be
    positive semidefinite (that needs spectral norm <= 1), so genuinely
    indefinite cases are rejected here rather than silently mangled.
    """
    m = binv.shape[0]
    gap = np.eye(m) - binv @ binv.T
    gap = (gap + gap.T) / 2
    try:
        return np.linalg.cholesky(gap)
    except np.linalg.LinAlgError:
        pass
    if np.abs(gap).max() < 1e-13:
        # Inverse is exactly orthogonal; nothing to complete.
        return np.zeros((m, m))
    smallest = float(np.linalg.eigvalsh(gap)[0])
    if smallest < -1e-10:
        raise InfeasibleEmbedding(
            "inverse has spectral norm above 1, so no orthogonal completion "
            f"exists (smallest completion eigenvalue {smallest:.3e})")
    # Semi-definite boundary (some unit-norm rows): nudge onto the cone.
    return np.linalg.cholesky(gap + 1e-14 * np.eye(m))


def embed_full(a) -> FullEmbedding:
    """Complete ``a^-1`` to a 2M x 2M orthogonal matrix.

    Raises InfeasibleEmbedding when some row or column of ``a^-1`` has norm
    above 1 (no unitary can contain it), or when the spectral norm exceeds 1
    so the block completion equation has no solution.
    """
    m = as_matrix(a).shape[0]
    binv = inverse(a)
    row_norms = np.linalg.norm(binv, axis=1)
    col_norms = np.linalg.norm(binv, axis=0)
    worst = max(row_norms.max(), col_norms.max())
    if worst > 1.0 + FEASIBILITY_TOL:
        raise InfeasibleEmbedding(
            f"inverse row/column norm {worst:.6f} exceeds 1")

    top = np.hstack([binv, _row_completion_block(binv)])
    candidates = np.vstack([np.eye(2 * m)[m:], np.eye(2 * m)[:m]])
    bottom = _orthonormal_complement_rows(top, candidates, m)
    u = np.vstack([top, bottom])
    return FullEmbedding(u=u, m=m)


def embed_reduced(a, k: int) -> ReducedEmbedding:
    """Complete row ``k`` (1-based) of ``a^-1`` to an (M+1) x (M+1) orthogonal matrix."""
    mat = as_matrix(a)
    m = mat.shape[0]
    if not 1 <= k <= m:
        raise IndexError(f"target index {k} out of range for dim {m}")
    row = inverse(mat)[k - 1]
    r = float(np.linalg.norm(row))
    if r > 1.0 + FEASIBILITY_TOL:
        raise InfeasibleEmbedding(f"row {k} of the inverse has norm {r:.6f} > 1")
    first = np.concatenate([row, [np.sqrt(max(0.0, 1.0 - r * r))]])
    rest = _orthonormal_complement_rows(first[None, :], np.eye(m + 1), m)
    return ReducedEmbedding(u=np.vstack([first, rest]), k=k)


def apply_embedding(emb: FullEmbedding | ReducedEmbedding, b) -> np.ndarray:
    """Matrix action of the embedding on ``b`` zero-padded to its dimension."""
    vec = as_vector(b)
    dim = emb.dim
    if vec.size > dim:
        raise ValueError(f"vector of length {vec.size} exceeds dimension {dim}")
    padded = np.zeros(dim)
    padded[:vec.size] = vec
    return emb.u @ padded
