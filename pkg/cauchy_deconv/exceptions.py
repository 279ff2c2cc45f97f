class DeconvError(Exception):
    """Base class of all exceptions raised by this library."""

class ShapeError(DeconvError, ValueError):
    """Raised when rasters have mismatched or unsupported shapes."""

class EmptyInputError(ShapeError):
    """Raised when a raster has no pixels."""

    def __init__(self, message='empty input'):
        super().__init__(message)

class KernelError(DeconvError, ValueError):
    """Raised when a kernel is malformed or cannot be applied to an image."""

class ParameterError(DeconvError, ValueError):
    """Raised when a scalar argument is outside its valid range."""

class ConfigError(DeconvError, ValueError):
    """Raised when a run configuration is inconsistent."""

class ImageFormatError(DeconvError, ValueError):
    """Raised when an image file cannot be decoded or encoded."""

class DivergenceError(DeconvError, ArithmeticError):
    """Exception raised when an iteration produces non-finite values.

    :param iteration: The iteration (counted from 1) at which
                      non-finite values first appeared.

    :param algorithm: Name of the algorithm that diverged.

    :param traces: The :any:`IterationTrace` records of the
                   iterations that completed before divergence.

    """

    def __init__(self, iteration, algorithm, traces=()):
        self.iteration = iteration
        self.algorithm = algorithm
        self.traces = list(traces)

        super().__init__(f'{algorithm} produced non-finite values at iteration {iteration}')

class TraceFormatError(DeconvError, ValueError):
    """Raised when a trace file does not have the expected columns."""
