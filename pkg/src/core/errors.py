"""
Exception hierarchy shared by the library and the command-line interface.

Validation problems map to exit code 1, numeric failures to exit code 2.
"""
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence


class MoloptError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class ValidationError(MoloptError):
    """Bad user input: parameters, configuration files or command-line flags."""

    exit_code = 1


class NumericError(MoloptError):
    """A numeric routine could not produce a trustworthy result."""

    exit_code = 2


@dataclass(frozen=True)
class Violation:
    """One failed parameter invariant."""

    code: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}({self.field}): {self.message}"


class ParameterValidationError(ValidationError):
    """One or more SystemParams invariants failed."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations: List[Violation] = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def codes(self) -> List[str]:
        return [v.code for v in self.violations]


class ConfigParseError(ValidationError):
    """The configuration document could not be parsed."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.path = path
        self.line = line
        self.field = field
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        if field is not None:
            message = f"{message} (field '{field}')"
        super().__init__(f"{location}{message}")


class MissingField(ConfigParseError):
    def __init__(self, field: str, path: Optional[str] = None):
        super().__init__("missing required field", path=path, field=field)


class UnknownField(ConfigParseError):
    def __init__(self, field: str, path: Optional[str] = None):
        super().__init__("unknown field", path=path, field=field)


class UnknownCommand(ValidationError):
    def __init__(self, command: str):
        self.command = command
        super().__init__(f"unknown command '{command}'")


class BadFlag(ValidationError):
    def __init__(self, flag: str, reason: str = "invalid flag"):
        self.flag = flag
        super().__init__(f"{reason}: '{flag}'")


class SingularMatrix(NumericError):
    def __init__(self, column: int, pivot: float, threshold: float):
        self.column = column
        self.pivot = pivot
        self.threshold = threshold
        super().__init__(
            f"matrix is singular: pivot modulus {pivot:.3e} in column {column} "
            + f"is below {threshold:.3e}"
        )


class DegenerateAllZero(NumericError):
    def __init__(self):
        super().__init__("all polynomial coefficients are zero")


class NoConvergence(NumericError):
    def __init__(
        self,
        message: str,
        best: Any = None,
        residual: Optional[float] = None,
        iterations: Optional[int] = None,
    ):
        self.best = best
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (iterations={iterations}, residual={residual})")


class StaticCouplingLimit(NumericError):
    """The vibration and IR mode sit exactly at their static limit: X_B is undetermined."""

    def __init__(self, s: float):
        self.s = s
        super().__init__(f"static response 1 - k_B k_c G_c = {s:.3e} vanishes; X_B is undetermined")


class InvalidBracket(NumericError):
    def __init__(self, lo: float, hi: float):
        self.lo = lo
        self.hi = hi
        super().__init__(f"invalid bracket: lo={lo!r} must be below hi={hi!r}")


class HalfMaxNotBracketed(NumericError):
    """The curve never drops below half maximum on at least one side."""

    def __init__(self, width: float, left_truncated: bool, right_truncated: bool):
        self.width = width
        self.left_truncated = left_truncated
        self.right_truncated = right_truncated
        self.truncated = left_truncated or right_truncated
        sides = [
            name
            for name, flag in (("left", left_truncated), ("right", right_truncated))
            if flag
        ]
        super().__init__(
            f"half maximum not bracketed on the {' and '.join(sides)} side; "
            + f"width to grid edge is {width:.6g}"
        )


class Diverges(NumericError):
    """The response has a pole (gain divergence) at the given IR frequency."""

    def __init__(self, omega_ir: float, detail: str = ""):
        self.omega_ir = omega_ir
        text = f"response diverges at omega_ir = {omega_ir:.9g} THz"
        if detail:
            text += f" ({detail})"
        super().__init__(text)


class InconclusiveBorderline(NumericError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(
            f"Routh array row {row} vanishes: marginal case, verdict inconclusive"
        )


class PoleInBand(NumericError):
    def __init__(self, omega_ir: float):
        self.omega_ir = omega_ir
        super().__init__(
            f"efficiency diverges at omega_ir = {omega_ir:.9g} THz: bandwidth undefined"
        )


class AllUnstable(NumericError):
    def __init__(self, lo: float, hi: float):
        super().__init__(f"no stable operating point for |G_a| in [{lo}, {hi}] THz")


class UnsupportedMode(ValidationError):
    def __init__(self, operation: str, mode: str):
        super().__init__(f"{operation} does not support detuning mode '{mode}'")
