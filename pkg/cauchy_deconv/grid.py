"""Dense 2D rasters and the pointwise arithmetic shared by every module.

Images and weight fields are two dimensional ``numpy.ndarray`` objects
of dtype ``float64``, indexed ``[row, col]`` (``y``, ``x``) in
row-major order. Library functions never modify their arguments.

"""

import numpy as np

from .exceptions import EmptyInputError, KernelError, ParameterError, ShapeError

DEFAULT_EPS = 1e-12
UNIT_SUM_TOLERANCE = 1e-12

Image = np.ndarray
WeightField = np.ndarray

def as_field(data, name='field', check_finite=True):
    """Convert ``data`` to a 2D float64 raster.

    :param data: Array-like of shape ``(height, width)``.
    :param name: Name used in error messages.
    :param check_finite: If *False*, NaN and infinite entries are
                         passed through.

    :returns: A float64 array. ``data`` itself is returned when it is
              already a float64 array.

    :raises ShapeError: If ``data`` is not two dimensional.
    :raises EmptyInputError: If ``data`` has no pixels.
    :raises ParameterError: If ``data`` contains NaN or infinite values.

    """

    field = np.asarray(data, dtype=np.float64)

    if field.ndim != 2:
        raise ShapeError(f'{name} must be two dimensional, got shape {field.shape}')

    if field.size == 0:
        raise EmptyInputError()

    if check_finite and not np.all(np.isfinite(field)):
        raise ParameterError(f'{name} contains non-finite values')

    return field

def check_same_shape(*fields):
    """Raise :any:`ShapeError` unless all array arguments share one shape.

    Scalar arguments are ignored.

    """

    shapes = {np.shape(f) for f in fields if np.ndim(f) > 0}

    if len(shapes) > 1:
        raise ShapeError(f'shape mismatch: {sorted(shapes)}')

def rms_norm(f):
    """Return the root mean square of the entries of ``f``.

    The mean uses numpy's pairwise summation, so the result does not
    depend on thread count. Entries are scaled by the largest magnitude
    before squaring, so finite fields never overflow.

    :param f: An image, weight field or any array of real or complex
              values (complex entries contribute their squared modulus).

    :returns: A nonnegative float.

    :raises EmptyInputError: If ``f`` has no entries.

    """

    f = np.asarray(f)

    if f.size == 0:
        raise EmptyInputError()

    f = np.abs(f).astype(np.float64, copy=False)
    peak = np.max(f)

    if peak == 0 or not np.isfinite(peak):
        return float(peak)

    return float(peak * np.sqrt(np.mean(np.square(f / peak))))

def guarded_divide(num, den, eps=DEFAULT_EPS):
    """Divide ``num`` by ``den`` pointwise, clamping vanishing denominators.

    Where ``den >= eps`` or ``den <= -eps`` the result is the exact
    quotient. Where ``den`` lies strictly between ``-eps`` and ``eps``
    the denominator is replaced by ``eps``.

    :param num: Numerator field (or scalar).
    :param den: Denominator field.
    :param eps: Positive clamp value.

    :returns: A new field.

    :raises ShapeError: If ``num`` and ``den`` differ in shape.
    :raises ParameterError: If ``eps`` is not positive.

    """

    if not eps > 0:
        raise ParameterError(f'eps must be positive, got {eps}')

    check_same_shape(num, den)

    den = np.asarray(den, dtype=np.float64)
    safe = np.where(den <= -eps, den, np.maximum(den, eps))

    return np.asarray(num, dtype=np.float64) / safe

def add(a, b):
    """Return ``a + b`` where ``b`` is a field of the same shape or a scalar."""

    check_same_shape(a, b)
    return np.add(a, b, dtype=np.float64)

def sub(a, b):
    """Return ``a - b`` where ``b`` is a field of the same shape or a scalar."""

    check_same_shape(a, b)
    return np.subtract(a, b, dtype=np.float64)

def mul(a, b):
    """Return the pointwise product ``a * b``."""

    check_same_shape(a, b)
    return np.multiply(a, b, dtype=np.float64)

def scale(a, c):
    """Return ``c * a`` for a scalar ``c``."""

    if np.ndim(c) != 0:
        raise ShapeError('scale() takes a scalar factor')

    return np.multiply(a, float(c), dtype=np.float64)


class Kernel:
    """A point spread function with odd side lengths anchored at its center.

    The entries are normalized to unit sum on construction, unless the
    sum is already within ``1e-12`` of one, in which case they are kept
    bit for bit. The data array is read-only.

    :param data: Array-like of shape ``(side_y, side_x)``.

    :param normalize: If *False* the entries are used as given.

    :raises KernelError: If a side length is even, an entry is
                         non-finite or the entries sum to zero.

    """

    def __init__(self, data, normalize=True):
        data = np.array(data, dtype=np.float64)

        if data.ndim != 2 or data.size == 0:
            raise KernelError(f'kernel must be a nonempty 2D grid, got shape {data.shape}')

        if data.shape[0] % 2 == 0 or data.shape[1] % 2 == 0:
            raise KernelError(f'kernel side lengths must be odd, got {data.shape[1]}x{data.shape[0]}')

        if not np.all(np.isfinite(data)):
            raise KernelError('kernel contains non-finite values')

        if normalize:
            total = data.sum()

            if total == 0:
                raise KernelError('kernel entries sum to zero')

            if abs(total - 1.0) > UNIT_SUM_TOLERANCE:
                data = data / total

        data.flags.writeable = False

        self._data = data
        self._memo = {}

    @property
    def data(self):
        """The kernel entries as a read-only ``(side_y, side_x)`` array."""

        return self._data

    @property
    def side_x(self):
        return self._data.shape[1]

    @property
    def side_y(self):
        return self._data.shape[0]

    @property
    def shape(self):
        return self._data.shape

    @property
    def center(self):
        """Index ``(row, col)`` of the anchor entry."""

        return (self.side_y // 2, self.side_x // 2)

    def memo(self, key, create):
        """Retrieve a value derived from this kernel, computing it once.

        If no value is stored under ``key``, ``create()`` is called
        and its result stored. Kernels are immutable, so derived
        values never go stale.

        """

        if key not in self._memo:
            self._memo[key] = create()

        return self._memo[key]

    def __eq__(self, other):
        if isinstance(other, Kernel):
            return np.array_equal(self._data, other._data)

        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f'Kernel({self.side_x}x{self.side_y}, sum={self._data.sum():.17g})'
