"""Exception types shared across the solver library."""


class QlinsysError(Exception):
    """Base class for all library errors."""


class SingularMatrix(QlinsysError):
    """Matrix determinant below the scale-aware singularity cutoff."""


class InfeasibleEmbedding(QlinsysError):
    """The inverse matrix cannot be placed inside an orthogonal matrix."""


class GramSchmidtDegenerate(QlinsysError):
    """Completion basis collapsed while orthogonalizing."""


class NormTooLarge(QlinsysError):
    """Input vector norm exceeds 1 and cannot be encoded as amplitudes."""


class NoConvergence(QlinsysError):
    """Numerical search exhausted its restart budget without a solution."""


class DegenerateFit(QlinsysError):
    """Least-squares fit is underdetermined (coincident abscissae)."""


class ProblemFileError(QlinsysError):
    """Problem description file failed to parse or validate."""
