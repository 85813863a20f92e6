"""Exception hierarchy for the extremal package."""


class ExtremalError(Exception):
    """Base class for all errors raised by this package."""


class DiscError(ExtremalError):
    pass


class CommonZeroOnDisc(DiscError):
    """All homogeneous components vanish at a point of the closed unit disc."""


class CircleCrossesInfinity(DiscError):
    """The denominator component vanishes on the unit circle."""


class CenterAtInfinity(DiscError):
    """The disc centre lies on the hyperplane at infinity."""


class RootFindingFailure(ExtremalError):
    pass


class DomainViolation(ExtremalError):
    """A boundary node of a disc was mapped outside the admissible set."""


class PointNotInDomain(ExtremalError):
    pass


class SamplingFailure(ExtremalError):
    pass


class ConstraintViolation(ExtremalError):
    """Parameters of a family disc do not satisfy the feasibility constraints."""


class WeightEvaluationError(ExtremalError):
    pass


class ParseError(ExtremalError):
    """Syntax or typing error in a weight expression.

    Attributes
    ----------
    position : int
        Zero-based character offset of the offending token.
    expected : frozenset of str
        Tokens that would have been accepted at ``position``.
    """

    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = frozenset(expected)
        detail = f"{message} at position {position}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class ConfigError(ExtremalError):
    pass


class BudgetExceeded(ExtremalError):
    pass
