"""Exception hierarchy. Every error raised by the package derives from
:class:`SmagdampError`; the ones that reject bad arguments also derive from
:class:`ValueError` so generic callers can catch them the usual way."""


class SmagdampError(Exception):
    pass


class ParameterError(SmagdampError, ValueError):
    pass


class GridError(SmagdampError, ValueError):
    pass


class DomainError(SmagdampError, ValueError):
    """A wall-normal coordinate outside [0, L]."""


class ValidityError(SmagdampError, ValueError):
    """Evaluation point outside the region where an approximation holds."""


class OverlapError(SmagdampError, ValueError):
    """Strip fraction too large for the pieces of the blended profile."""


class PreconditionError(SmagdampError, ValueError):
    pass


class UndefinedRatioError(SmagdampError, ArithmeticError):
    pass


class IntegrationError(SmagdampError, ArithmeticError):
    pass


class SequencingError(SmagdampError, ValueError):
    pass


class OracleError(SmagdampError, RuntimeError):
    pass


class SolverError(SmagdampError, RuntimeError):
    pass


class StabilityError(SolverError):
    pass


class BoundednessError(SolverError):
    """Kinetic energy escaped the running-median guard."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class CheckpointError(SmagdampError, OSError):
    pass


class ConfigError(SmagdampError, ValueError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
