import numpy as np

from .exceptions import ParameterError
from .grid import Kernel

def gaussian_kernel(sigma, radius):
    """Create a clipped, radially symmetric Gaussian point spread function.

    The kernel is square with side ``2*radius + 1``. Entry ``(dx, dy)``
    is proportional to ``exp(-(dx**2 + dy**2) / (2*sigma**2))`` and the
    entries are normalized to unit sum after clipping, so the unit-sum
    property holds exactly rather than relying on the analytic mass.

    The same floating point expression is evaluated for every entry,
    hence entries at equal ``dx**2 + dy**2`` are bit-identical.

    :param sigma: Standard deviation in pixels.
    :param radius: Clipping radius in pixels.

    :returns: The kernel.
    :rtype: Kernel

    :raises ParameterError: If ``sigma`` or ``radius`` is not positive.

    """

    if not sigma > 0:
        raise ParameterError(f'sigma must be positive, got {sigma}')

    if int(radius) != radius or radius < 1:
        raise ParameterError(f'radius must be a positive integer, got {radius}')

    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    dy, dx = np.meshgrid(offsets, offsets, indexing='ij')

    return Kernel(np.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)))

def delta_kernel():
    """Create the 1x1 identity kernel."""

    return Kernel([[1.0]])

def is_symmetric(k, tol=1e-12):
    """Check whether kernel ``k`` is point symmetric and symmetric under transposition.

    Both ``k(dx, dy) == k(-dx, -dy)`` and ``k(dx, dy) == k(dy, dx)``
    must hold within ``tol`` for every entry. Non-square kernels are
    never symmetric.

    """

    data = k.data

    if data.shape[0] != data.shape[1]:
        return False

    return bool(
        np.all(np.abs(data - data[::-1, ::-1]) <= tol) and
        np.all(np.abs(data - data.T) <= tol)
    )
