"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """A parameter or argument lies outside the domain an operation accepts."""


class SingularityError(DomainError):
    """A reciprocal term was evaluated at (or numerically too close to) its pole."""


class NoRootError(RuntimeError):
    """Bracket expansion failed to find a sign change."""


class ModelError(ValueError):
    """A plant model violates a structural assumption, e.g. its relative degree."""


class IntegrationError(RuntimeError):
    """The integrator produced or received a non-finite value."""


class PositivityError(RuntimeError):
    """A trajectory that theory keeps strictly positive reached zero or below."""


class ConfigError(ValueError):
    """A scenario configuration is malformed.

    ``line`` is the 1-based line in the source text when known.
    """

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None and line is not None:
            where = f"{source}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
