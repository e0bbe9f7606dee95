"""Exception hierarchy shared by the numerical services and the CLI."""

from typing import Optional


class QWorkError(Exception):
    """Base error for everything raised by this package"""


class ConfigError(QWorkError):
    """Invalid run configuration or command-line input"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = ""
        if field:
            location = f"{field}: "
        if line is not None:
            location = f"line {line}, {location}"
        super().__init__(f"{location}{message}")


class DimensionMismatchError(QWorkError, ValueError):
    """Operands with incompatible shapes"""


class NonHermitianError(QWorkError, ValueError):
    """Matrix expected to be Hermitian is not"""

    def __init__(self, defect: float, bound: float):
        self.defect = defect
        self.bound = bound
        super().__init__(
            f"matrix is not Hermitian: max|A - A^H| = {defect:.3e} exceeds {bound:.3e}"
        )


class InvalidStateError(QWorkError, ValueError):
    """Density matrix violating trace, Hermiticity or positivity"""


class ScheduleError(QWorkError, ValueError):
    """Invalid drive schedule or control value outside a tabulated range"""


class ParameterError(QWorkError, ValueError):
    """Physical parameter outside its admissible range"""


EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
