"""Exception types raised across the package."""


class MrpiError(Exception):
    """Base class for all package errors."""


class ParameterError(MrpiError, ValueError):
    """An argument is outside its documented domain."""


class ImageFormatError(MrpiError, ValueError):
    """The file is readable but not a supported PNG or binary PGM."""


class DegenerateInputError(MrpiError, ValueError):
    """The input carries no usable information (e.g. an all-zero field)."""


class NumericalDivergenceError(MrpiError, ArithmeticError):
    """Level-set evolution produced non-finite values.

    ``step`` is the zero-based evolve step that diverged and ``run_index``
    the RPI run it belongs to, when known.
    """

    def __init__(self, message, step=None, run_index=None):
        super().__init__(message)
        self.step = step
        self.run_index = run_index
