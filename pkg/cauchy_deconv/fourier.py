"""Two dimensional DFTs and circular convolution.

All convolutions in this library are circular: the image is treated
as one period of a periodic function. This makes flux conservation
exact and keeps the Fourier diagnostics consistent with the
iterations, but results near the image border differ from
implementations that pad by edge replication.

The number of FFT worker threads is taken from the ``DECONV_THREADS``
environment variable (``0`` or unset means one per CPU) and can be
overridden for the current thread with :any:`workers`. Results are
identical for every thread count.

"""

import logging
import os
import threading
from contextlib import contextmanager

import numpy as np
import scipy.fft

from .exceptions import EmptyInputError, KernelError, ShapeError
from .grid import as_field

THREADS_ENV = 'DECONV_THREADS'

_data = threading.local()

def thread_count():
    """Number of FFT workers to use, in the form accepted by ``scipy.fft``.

    :returns: A positive count, or ``-1`` for one worker per CPU.

    """

    override = getattr(_data, 'workers', None)

    if override is not None:
        return override

    return _parse_threads(os.environ.get(THREADS_ENV, ''))

def _parse_threads(value):
    value = value.strip()

    if not value:
        return -1

    try:
        count = int(value)

    except ValueError:
        logging.warning('Ignoring invalid %s=%r', THREADS_ENV, value)
        return -1

    if count < 0:
        logging.warning('Ignoring negative %s=%r', THREADS_ENV, value)
        return -1

    return count if count > 0 else -1

@contextmanager
def workers(count):
    """Set the number of FFT workers within a managed context.

    ``count`` follows the ``DECONV_THREADS`` convention: ``0`` means
    one worker per CPU. The previous setting is restored when exiting
    the context. The setting is local to the calling thread.

    .. code-block::

       with workers(1):
           blurred = convolve(image, kernel)

    """

    previous = getattr(_data, 'workers', None)
    _data.workers = count if count > 0 else -1

    try:
        yield

    finally:
        _data.workers = previous


class Spectrum:
    """The unnormalized DFT of a real raster, DC at index ``(0, 0)``.

    :param coefficients: Complex array of shape ``(height, width)``.

    """

    def __init__(self, coefficients):
        self._coefficients = np.asarray(coefficients, dtype=np.complex128)

    @property
    def coefficients(self):
        return self._coefficients

    @property
    def width(self):
        return self._coefficients.shape[1]

    @property
    def height(self):
        return self._coefficients.shape[0]

    @property
    def shape(self):
        return self._coefficients.shape

    def magnitude(self):
        """Return ``|coefficient|`` for every frequency."""

        return np.abs(self._coefficients)

    def centered(self):
        """Return the coefficients with DC shifted to the raster center."""

        return np.fft.fftshift(self._coefficients)

    def __repr__(self):
        return f'Spectrum({self.width}x{self.height})'

def fft2(img):
    """Compute the forward DFT of ``img`` (no normalization).

    :raises EmptyInputError: If ``img`` has no pixels.

    """

    img = as_field(img, 'image', check_finite=False)
    return Spectrum(scipy.fft.fft2(img, workers=thread_count()))

def ifft2(spectrum):
    """Compute the inverse DFT of ``spectrum``, scaled by ``1/(W*H)``.

    The imaginary residue of the inverse transform is discarded.

    """

    coefficients = spectrum.coefficients if isinstance(spectrum, Spectrum) else np.asarray(spectrum)

    if coefficients.size == 0:
        raise EmptyInputError()

    return scipy.fft.ifft2(coefficients, workers=thread_count()).real

def pad_kernel(k, shape):
    """Zero-pad kernel ``k`` to ``shape`` with its center moved to index ``(0, 0)``.

    Offsets wrap around, so the entry at offset ``(-1, 0)`` from the
    center lands in the last row.

    :raises KernelError: If the kernel is larger than ``shape``.

    """

    rows, cols = shape

    if k.side_y > rows or k.side_x > cols:
        raise KernelError(f'kernel {k.side_x}x{k.side_y} is larger than image {cols}x{rows}')

    padded = np.zeros(shape, dtype=np.float64)
    padded[:k.side_y, :k.side_x] = k.data

    cy, cx = k.center
    return np.roll(padded, (-cy, -cx), axis=(0, 1))

def transfer_function(k, shape):
    """Real-FFT transfer function of ``k`` padded to ``shape``.

    The result is cached on the kernel.

    """

    shape = tuple(shape)

    return k.memo(
        ('rfft2', shape),
        lambda: scipy.fft.rfft2(pad_kernel(k, shape), workers=thread_count())
    )

def convolve(img, k):
    """Circularly convolve ``img`` with kernel ``k``.

    This is the discrete form of ``h = k * g``: the kernel is
    zero-padded to the image size, center-anchored, and multiplied
    with the image in the frequency domain.

    :param img: The image.
    :param k: The kernel.
    :type k: Kernel

    :returns: A new image of the same shape.

    :raises KernelError: If the kernel is larger than the image.

    """

    img = as_field(img, 'image', check_finite=False)
    transfer = transfer_function(k, img.shape)
    threads = thread_count()

    return scipy.fft.irfft2(
        scipy.fft.rfft2(img, workers=threads) * transfer,
        s=img.shape,
        workers=threads
    )

def circular_convolve(a, b):
    """Circularly convolve two rasters of the same shape, origin at ``(0, 0)``."""

    a = as_field(a, check_finite=False)
    b = as_field(b, check_finite=False)

    if a.shape != b.shape:
        raise ShapeError(f'shape mismatch: {a.shape} and {b.shape}')

    threads = thread_count()

    return scipy.fft.irfft2(
        scipy.fft.rfft2(a, workers=threads) * scipy.fft.rfft2(b, workers=threads),
        s=a.shape,
        workers=threads
    )

def power_spectrum_image(img):
    """Log-scaled magnitude spectrum of ``img`` for display.

    :returns: ``log(1 + |fft2(img)|)`` with DC shifted to the raster
              center.

    """

    return np.log1p(np.abs(fft2(img).centered()))
