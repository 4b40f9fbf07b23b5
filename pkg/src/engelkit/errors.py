"""Exception types.  CLI reports surface these class names verbatim."""


class EngelkitError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class HorizontalViolation(EngelkitError):
    pass


class NonGeneric(EngelkitError):
    pass


class DerivTooSmall(EngelkitError):
    pass


class PushoffCollision(EngelkitError):
    pass


class DegenerateTangency(EngelkitError):
    pass


class AreaObstruction(EngelkitError):
    pass


class NotRegular(EngelkitError):
    pass


class WindowOverlap(EngelkitError):
    pass


class MoveNotApplicable(EngelkitError):
    pass


class ResolutionExhausted(EngelkitError):
    pass


class NotConverged(EngelkitError):
    pass


class NotRegularValue(EngelkitError):
    pass


class BadParameters(EngelkitError):
    pass


class InterpolationDegenerate(EngelkitError):
    pass
