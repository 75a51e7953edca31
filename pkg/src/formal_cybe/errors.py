"""Exception hierarchy shared by all modules."""


class FormalCYBEError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(FormalCYBEError):
    pass


class JacobiViolation(FormalCYBEError):
    pass


class AntisymmetryViolation(JacobiViolation):
    pass


class KillingDegenerate(FormalCYBEError):
    pass


class BadRank(FormalCYBEError):
    pass


class BadDecomposition(FormalCYBEError):
    pass


class WindowTooSmall(FormalCYBEError):
    pass


class NotComposable(FormalCYBEError):
    pass


class NotInvertible(FormalCYBEError):
    pass


class NotSkew(FormalCYBEError):
    pass


class NotNormalized(FormalCYBEError):
    pass


class MixedDoubleKinds(FormalCYBEError):
    pass


class BadIndex(FormalCYBEError):
    pass


class InfiniteRank(FormalCYBEError):
    pass


class DegenerateDualSet(FormalCYBEError):
    pass


class NotAutomorphism(FormalCYBEError):
    pass


class AllZeroWindow(FormalCYBEError):
    pass


class ZeroSeries(FormalCYBEError):
    pass


class WrongMultiplicity(FormalCYBEError):
    pass


class MathematicalObstruction(FormalCYBEError):
    """A classification outcome rather than a bad input (CLI exit code 3)."""


class UnsupportedMultiplicity(MathematicalObstruction):
    """Vanishing order of s at 0 is at least 3; no formal r-matrix has such an s."""

    def __init__(self, order):
        self.order = order
        super().__init__(
            f"s vanishes to order {order} at y=0; formal r-matrices only allow orders 0, 1, 2"
        )


class Obstructed(MathematicalObstruction):
    def __init__(self, residue):
        self.residue = residue
        super().__init__(f"obstruction residue {residue}")
