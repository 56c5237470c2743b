"""Exception hierarchy. Every error raised by the package derives from ZoneCoverError."""


class ZoneCoverError(ValueError):
    pass


class ZeroVector(ZoneCoverError):
    pass


class DimensionMismatch(ZoneCoverError):
    pass


class InvalidCount(ZoneCoverError):
    pass


class InvalidDimension(ZoneCoverError):
    pass


class WrongDimension(ZoneCoverError):
    pass


class UncertifiedDimension(ZoneCoverError):
    pass


class OnHyperplane(ZoneCoverError):
    """A point lies (numerically) on one of the arrangement's hyperplanes."""


class NoValidStart(ZoneCoverError):
    pass


class HypothesisNotViolated(ZoneCoverError):
    """The point already keeps the required distance from the chosen hyperplane."""


class DegenerateOrthogonal(ZoneCoverError):
    pass


class InsufficientSamples(ZoneCoverError):
    pass


class NotCritical(ZoneCoverError):
    pass


class GridTooCoarse(ZoneCoverError):
    pass
