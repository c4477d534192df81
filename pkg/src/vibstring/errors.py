"""Exception hierarchy shared by the solver modules and the CLI.

Every exception carries the process exit code the CLI reports for it.
"""


class SpectralError(Exception):
    exit_code = 1


class DomainError(SpectralError, ValueError):
    """Input outside the admissible set (angles, intervals, positivity)."""

    exit_code = 2


class ParseError(DomainError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class PreconditionError(DomainError):
    """An operation was called where its hypotheses do not hold."""


class CurveExcludedError(PreconditionError):
    """Boundary pair lies on the zero curve cos a cos b - sin(a - b) = 0.

    There the ground eigenvalue vanishes for every density, so first
    eigenvalue uniqueness conditions carry no information.
    """

    exit_code = 6


class IntegrationError(SpectralError):
    def __init__(self, message: str, x: float):
        super().__init__(f"{message} (last good x = {x!r})")
        self.x = x

    exit_code = 4


class LocalizationError(SpectralError):
    exit_code = 4
