"""Exception hierarchy shared by all pipeline stages."""


class MomlocError(Exception):
    """Base class; ``module`` names the pipeline stage that raised."""

    module = "momloc"


class MalformedExpressionError(MomlocError, ValueError):
    module = "symkernel"


class PoleError(MomlocError, ZeroDivisionError):
    """A substitution or evaluation hit an identically vanishing denominator."""

    module = "symkernel"

    def __init__(self, message, denominator=None):
        super().__init__(message)
        self.denominator = denominator


class InvalidArgumentError(MomlocError, ValueError):
    module = "momloc"


class ModelError(MomlocError, ValueError):
    module = "momdist"


class UnsupportedTermError(MomlocError, ValueError):
    module = "energy_reduce"


class SingularTermError(MomlocError, ZeroDivisionError):
    module = "energy_reduce"

    def __init__(self, message, denominator=None):
        super().__init__(message)
        self.denominator = denominator


class UnjustifiedConstraintError(MomlocError, ValueError):
    module = "energy_reduce"


class SingularPointError(MomlocError, ZeroDivisionError):
    """Numeric evaluation landed on (or too close to) a recorded singular set."""

    module = "locality"

    def __init__(self, message, denominator=None):
        super().__init__(message)
        self.denominator = denominator


class AccuracyError(MomlocError, ArithmeticError):
    """Quadrature could not certify the requested accuracy."""

    module = "numoracle"

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(MomlocError, ValueError):
    module = "cli"
