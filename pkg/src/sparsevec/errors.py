"""Exception types shared across the package."""


class SparsevecError(Exception):
    """Base class for all package-specific errors."""


class ZeroRetraction(SparsevecError):
    """q + d has (numerically) zero norm, so it cannot be projected back to the sphere."""


class NonSmoothLoss(SparsevecError):
    """A gradient-based solver was handed a nonsmooth loss."""


class NotTwiceDifferentiable(SparsevecError):
    """Second derivatives were requested for a loss that does not have them."""


class SubproblemFail(SparsevecError):
    """The inner convex subproblem did not reach its residual tolerance."""


class RankDeficient(SparsevecError):
    """The data covariance is too degenerate to whiten."""


class IncompleteRecovery(SparsevecError):
    """Fewer distinct dictionary atoms were found than requested.

    Carries the partial result in ``atoms`` and ``report``.
    """

    def __init__(self, msg, atoms=None, report=None):
        super().__init__(msg)
        self.atoms = atoms
        self.report = report


class AtTarget(SparsevecError):
    """A probe that needs distance > 0 was evaluated at a target point."""
