"""Exception hierarchy shared by all relgcn modules."""


class RelGCNError(Exception):
    """Base class for every error raised by relgcn."""


class DimensionError(RelGCNError, ValueError):
    """Operand shapes are incompatible."""


class UnsupportedContractionError(RelGCNError, ValueError):
    pass


class DomainError(RelGCNError, ValueError):
    """An input lies outside the domain of an operation (e.g. negative weights)."""


class NonFiniteError(RelGCNError, ArithmeticError):
    pass


class UsageError(RelGCNError, ValueError):
    pass


class ConfigError(RelGCNError, ValueError):
    """Invalid or inconsistent run/model configuration."""


class IntegrityError(RelGCNError, RuntimeError):
    """Internal consistency violated (unregistered parameter, NaN in stats, ...)."""


class ParseError(RelGCNError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class DataError(RelGCNError, OSError):
    """A dataset is missing, empty, or structurally unusable."""
