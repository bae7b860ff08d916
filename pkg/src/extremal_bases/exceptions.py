"""Exception types raised by the library."""


class DimensionError(ValueError):
    """Operands live in spaces of different dimension."""


class RankDeficiencyError(ValueError):
    """Input vectors are numerically linearly dependent."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"vector {index} is linearly dependent on its predecessors")


class NotFullBasisError(ValueError):
    """A frame that must span the whole space does not."""


class OutsideDomainError(ValueError):
    """A base point is not strictly inside the domain."""


class NearBoundaryError(OutsideDomainError):
    """A base point is too close to the boundary for stable slicing."""


class OptimizerError(RuntimeError):
    """The sphere search returned a non-finite objective value."""


class BasisKindError(ValueError):
    """An operation received an extremal basis of the wrong kind."""
