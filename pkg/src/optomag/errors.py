"""Exception hierarchy shared by the library and the CLI."""


class OptomagError(Exception):
    """Base class for all errors raised by optomag."""


class ConfigError(OptomagError, ValueError):
    """Malformed or unknown configuration input."""


class CascadeError(OptomagError, ValueError):
    """A closed-form expression left its domain of validity.

    The message names the formula that failed so the caller can tell which
    reduction step broke down.
    """

    def __init__(self, formula, message):
        self.formula = formula
        super().__init__(f"{formula}: {message}")


class SteadyStateError(CascadeError):
    """Fixed-point iteration for the driven steady state did not converge."""


class UnstableFormError(OptomagError, ValueError):
    """Quadratic form is critical or unstable; no Bogoliubov map exists."""


class NumericalError(OptomagError, ArithmeticError):
    """Integrator or eigen-solver failed its accuracy checks."""


class RegimeError(OptomagError):
    """A mandatory validity condition failed and the run was aborted."""

    def __init__(self, report, message=None):
        self.report = report
        failed = ", ".join(c.name for c in report.failures())
        super().__init__(message or f"regime validation failed: {failed}")
