"""Exception hierarchy. The CLI maps each class to an exit code."""


class ToriDivError(Exception):
    """Base class for all library errors."""


class DomainError(ToriDivError, ValueError):
    """Input lies outside the domain of an operation (zero vector, point outside a fan)."""


class PreconditionError(ToriDivError, ValueError):
    """A checked precondition of an operation does not hold."""


class UsageError(ToriDivError, ValueError):
    """Malformed input: dimension mismatch, bad JSON, unparsable rational."""


class InternalInconsistencyError(ToriDivError, RuntimeError):
    """A structural claim that must hold was found violated at runtime."""
