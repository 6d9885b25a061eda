"""Exception types raised by the solvers."""


class RicsolveError(ValueError):
    """Base class; solver rejections all derive from this."""


class GridError(RicsolveError):
    pass


class GridMismatchError(RicsolveError):
    pass


class NonFiniteError(RicsolveError):
    pass


class SeriesCapError(RicsolveError):
    """The truncation criterion asked for more terms than the configured cap."""

    def __init__(self, t: float, cap: int, tol: float):
        self.t = t
        self.cap = cap
        self.tol = tol
        super().__init__(
            f"series needs more than {cap} terms for tol={tol:g} "
            f"(P(|f|+|g|) reaches t={t:.6g}); refine the interval"
        )


class SingularMatrixError(RicsolveError):
    pass


class DeterminantError(RicsolveError):
    def __init__(self, worst: float, node: float, limit: float):
        self.worst = worst
        self.node = node
        self.limit = limit
        super().__init__(
            f"det M deviates from 1 by {worst:.3e} at x={node:.6g} (limit {limit:.3e})"
        )


class ExpressionError(RicsolveError):
    pass
