"""Exception hierarchy shared by every ovlstat module."""


class OvlstatError(Exception):
    """Base class for all library errors."""


class InvalidInput(OvlstatError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateVariance(OvlstatError, ArithmeticError):
    """A dispersion-based denominator is zero."""


class DivisionByZero(OvlstatError, ZeroDivisionError):
    """The location difference in a Z'-type denominator is zero."""


class DirectionUndefined(OvlstatError, ValueError):
    """Group means tie, so the positive direction cannot be determined."""


class FormatError(OvlstatError, ValueError):
    """Input file is missing its header or required columns."""


class ParseError(OvlstatError, ValueError):
    """A data row could not be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DuplicateWell(ParseError):
    """Two rows share the same (plate, row, col)."""


class InsufficientControls(OvlstatError, ValueError):
    """A plate has fewer than two wells of some control type."""

    def __init__(self, plate_id: str, n_pos: int, n_neg: int):
        self.plate_id = plate_id
        self.n_pos = n_pos
        self.n_neg = n_neg
        super().__init__(
            f"plate {plate_id!r}: need >= 2 positive and >= 2 negative controls, "
            f"got {n_pos} and {n_neg}"
        )


class FitError(OvlstatError, RuntimeError):
    """Iterative model fit failed to converge."""

    def __init__(self, message: str, iterations: int, grad_norm: float):
        self.iterations = iterations
        self.grad_norm = grad_norm
        super().__init__(f"{message} (iterations={iterations}, |grad|={grad_norm:.3g})")
