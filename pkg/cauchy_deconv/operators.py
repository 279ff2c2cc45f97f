"""Linear operators on weight fields.

The discrete Laplacian is the 5-point stencil with periodic wrap,
matching the circular boundary of :any:`convolve`. Its DFT modes are
eigenfunctions with eigenvalue ``-lam`` where::

    lam(ky, kx) = (2 - 2 cos(2 pi ky / H)) + (2 - 2 cos(2 pi kx / W))

so one step of ``f - (alpha**2 / n) * laplacian(f)`` multiplies each
mode by ``1 + alpha**2 * lam / n``.

"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, ShapeError
from .fourier import convolve, fft2, ifft2
from .grid import DEFAULT_EPS, as_field, check_same_shape, rms_norm

def laplacian(f):
    """Apply the periodic 5-point Laplacian stencil to ``f``.

    Evaluated as the sum of the four neighbour differences, so that
    constant fields map to exactly zero.

    :raises ShapeError: If ``f`` is smaller than 3x3.

    """

    f = as_field(f, check_finite=False)

    if f.shape[0] < 3 or f.shape[1] < 3:
        raise ShapeError(f'field too small for the Laplacian stencil: {f.shape}')

    return (
        (np.roll(f, 1, axis=0) - f) +
        (np.roll(f, -1, axis=0) - f) +
        (np.roll(f, 1, axis=1) - f) +
        (np.roll(f, -1, axis=1) - f)
    )

def laplacian_eigenvalues(shape):
    """Return ``lam`` for every DFT mode of a field of ``shape``.

    The Laplacian maps mode ``(ky, kx)`` to ``-lam[ky, kx]`` times
    itself. The layout matches :any:`fft2` (DC at index ``(0, 0)``).

    """

    rows, cols = shape

    wy = 2.0 * np.pi * np.fft.fftfreq(rows)
    wx = 2.0 * np.pi * np.fft.fftfreq(cols)

    return (2.0 - 2.0 * np.cos(wy))[:, np.newaxis] + (2.0 - 2.0 * np.cos(wx))[np.newaxis, :]


@dataclass(frozen=True, eq=False)
class LaplacianTerm:
    """The Laplacian of a weight field together with its RMS norm.

    Consumers scale the correction by ``1 / max(norm**p, eps)``;
    keeping numerator and norm apart lets that guard live in one
    place, :any:`LaplacianTerm.scaled`.

    """

    field: np.ndarray
    norm: float
    p: float = 1.0

    def scaled(self, eps=DEFAULT_EPS):
        """Return ``field / max(norm**p, eps)``."""

        denominator = self.norm ** self.p if self.norm > 0 else 0.0
        return self.field / max(denominator, eps)

def normalized_laplacian_term(f, p=1.0):
    """Compute the Laplacian of ``f`` and its RMS norm.

    :param f: The weight field.
    :param p: Exponent applied to the norm by :any:`LaplacianTerm.scaled`.

    :rtype: LaplacianTerm

    """

    if not np.isfinite(p):
        raise ParameterError(f'p must be finite, got {p}')

    field = laplacian(f)
    return LaplacianTerm(field=field, norm=rms_norm(field), p=float(p))

def exp_limit_apply(f, alpha, n_steps, uniform=False):
    """Approximate ``exp(-alpha**2 * laplacian)`` applied to ``f`` by repeated steps.

    With ``uniform=False`` step ``m`` (counted from 1) replaces ``f``
    by ``f - (alpha**2 / m) * laplacian(f)``, the iterate form in
    which ``f`` plays the role of the initial weight. Each mode is
    then multiplied by ``prod(1 + alpha**2 * lam / m)``.

    With ``uniform=True`` every step uses ``alpha**2 / n_steps``,
    i.e. ``(I - (alpha**2 / n) laplacian)**n``, whose multiplier
    ``(1 + alpha**2 * lam / n)**n`` tends to ``exp(alpha**2 * lam)``.

    :param f: The field to which the operator is applied.
    :param alpha: Regularization length in pixels.
    :param n_steps: Number of steps, at least 1.
    :param uniform: Use the fixed step ``alpha**2 / n_steps``.

    :raises ParameterError: If ``n_steps`` is less than 1.

    """

    if n_steps < 1:
        raise ParameterError(f'n_steps must be at least 1, got {n_steps}')

    f = np.array(as_field(f), dtype=np.float64)
    a2 = alpha * alpha

    for m in range(1, n_steps + 1):
        f = f - (a2 / (n_steps if uniform else m)) * laplacian(f)

    return f

def exp_limit_spectral(f, alpha):
    """Apply ``exp(-alpha**2 * laplacian)`` exactly in the Fourier domain.

    This is the ``n -> infinity`` limit of :any:`exp_limit_apply` with
    ``uniform=True``: mode ``(ky, kx)`` is multiplied by
    ``exp(alpha**2 * lam[ky, kx])``.

    """

    f = as_field(f)
    multiplier = np.exp(alpha * alpha * laplacian_eigenvalues(f.shape))

    return ifft2(fft2(f).coefficients * multiplier)

def spectral_multiplier(x, n_steps, uniform=False):
    """Scalar multiplier of one eigenmode after ``n_steps`` exponential-limit steps.

    :param x: The product ``alpha**2 * lam`` for the mode.

    :returns: ``(1 + x / n)**n`` if ``uniform`` else the product of
              ``1 + x / m`` for ``m = 1 .. n``.

    """

    if uniform:
        return (1.0 + x / n_steps) ** n_steps

    result = 1.0

    for m in range(1, n_steps + 1):
        result *= 1.0 + x / m

    return result

def von_neumann_step(g_n, h, k):
    """One partial-sum step of the Von Neumann series ``sum (I - k*)^n h``.

    :returns: ``h + g_n - convolve(g_n, k)``.

    :raises ShapeError: If ``g_n`` and ``h`` differ in shape.

    """

    check_same_shape(g_n, h)
    return h + (g_n - convolve(g_n, k))
