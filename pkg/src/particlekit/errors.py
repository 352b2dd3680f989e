"""Exception types raised by particlekit."""


class ConfigurationError(ValueError):
    """Invalid domain or search configuration."""


class DomainViolationError(ValueError):
    """A position lies outside a non-periodic domain boundary."""


class SearchRadiusError(ValueError):
    """A query radius exceeds what adjacent-cell search can cover."""


class StaleReferenceError(RuntimeError):
    """A ParticleRef was used after a structural change of its set."""


class StaleIndexError(RuntimeError):
    """A spatial index was queried after its particle set changed."""
