"""Shared exception types for gauge-distance location problems."""


class InputError(ValueError):
    """Malformed user input: bad descriptor, bad JSON, inconsistent data."""


class DimensionMismatchError(InputError):
    """Operands live in different dimensions."""


class GaugeDefinitionError(InputError):
    """Unit-ball data does not define a valid gauge (origin not interior, unbounded, ...)."""


class SetDefinitionError(InputError):
    """Site data does not define a supported convex set."""


class EmptyInstanceError(InputError):
    """Instance has no sites."""


class PreconditionError(ValueError):
    """Operation called outside its stated preconditions."""


class CertificateError(ValueError):
    """A certificate is structurally unusable for the requested construction."""


class NonattainmentSuspected(Exception):
    """The infimum seems to be approached along a recession direction.

    Carries the best iterate found so far; only reachable with unbounded
    sites, which the supported site classes make a defensive corner case.
    """

    def __init__(self, best_point, best_value, direction):
        super().__init__(
            f"objective keeps decreasing along {direction}; best value {best_value}"
        )
        self.best_point = best_point
        self.best_value = best_value
        self.direction = direction
