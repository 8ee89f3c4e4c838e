"""Error hierarchy shared by every layer of the simulator"""

from typing import Any


class SimulationError(Exception):
    pass


class DomainError(SimulationError, ValueError):
    """Argument outside the domain where the operation is defined (e.g. atanh at |2x| >= 1)"""


class DegenerateError(SimulationError, ValueError):
    """A coefficient the formula divides by is zero"""


class NonFiniteError(SimulationError, ArithmeticError):
    """
    Integration produced NaN or inf.

    `partial` holds whatever was recorded before the abort (a Trace or a sample array).
    """

    def __init__(self, message: str, partial: Any = None, time: float | None = None) -> None:
        super().__init__(message)
        self.partial = partial
        self.time = time


class NoTangencyError(SimulationError):
    pass


class NotApplicableError(SimulationError):
    pass


class ScanQualityError(SimulationError):
    def __init__(self, message: str, region_map: Any = None) -> None:
        super().__init__(message)
        self.region_map = region_map


class ConfigError(SimulationError, ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None) -> None:
        self.key = key
        self.line = line
        location = ""
        if key is not None:
            location = f" [key: {key}" + (f", line {line}" if line is not None else "") + "]"
        super().__init__(f"{message}{location}")


class UnsupportedArtifactError(SimulationError, TypeError):
    pass


class CheckFailedError(SimulationError):
    def __init__(self, message: str, failures: list[str] | None = None) -> None:
        super().__init__(message)
        self.failures = failures or []
