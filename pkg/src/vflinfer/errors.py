"""Exception types shared across the library."""


class VflinferError(Exception):
    """Base class for all library errors."""


class ShapeError(VflinferError, ValueError):
    """Array dimensions do not match an operation's contract."""


class InputError(VflinferError, ValueError):
    """Invalid argument value (empty dataset, fraction out of range, ...)."""


class NumericError(VflinferError, RuntimeError):
    """A numeric computation failed or produced non-finite values."""


class DegenerateProblemError(VflinferError, ValueError):
    """The attack's linear system carries no information about the target."""


class AttackInfeasibleError(VflinferError, RuntimeError):
    """No candidate consistent with the observation exists."""


class ParseError(VflinferError, ValueError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConfigError(VflinferError, ValueError):
    """Invalid experiment configuration; collects every problem found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
