"""Exception hierarchy shared by all modules."""


class BoostParetoError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(BoostParetoError, ValueError):
    """A parameter set or circuit violates its construction invariants."""


class DomainError(BoostParetoError, ValueError):
    """A closed-form expression is evaluated outside its domain."""


class DegenerateError(BoostParetoError):
    """The return map has unit slope magnitude, so the fixed point is undefined."""


class NoOrbitError(BoostParetoError):
    """No period-T_p orbit of either assumed type exists at the parameters."""


class TypeMismatchError(BoostParetoError, TypeError):
    """An operation was applied to an orbit of the wrong type."""


class EventStallError(BoostParetoError):
    """The simulated discharge phase never reached the lower threshold."""


class ConfigError(BoostParetoError, ValueError):
    """Invalid evolutionary-algorithm configuration."""


class EmptyFrontError(BoostParetoError, ValueError):
    """An indicator was asked to measure an empty front."""


class RefPointError(BoostParetoError, ValueError):
    """A front point does not dominate the hypervolume reference point."""
