"""Quality measures of a reconstruction.

All norms are root mean square values (:any:`rms_norm`). Measures
comparing against a ground truth image are only available when one is
supplied; the residual estimate needs only the observed image.

"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .fourier import convolve, fft2
from .grid import DEFAULT_EPS, as_field, check_same_shape, guarded_divide, rms_norm

@dataclass(frozen=True)
class IterationTrace:
    """Measurements taken after one iteration.

    ``rel_err`` and ``ftr`` are NaN when no ground truth was supplied.
    ``wall_ms`` is 0.0 unless timing was requested.

    """

    n: int
    alpha_n: float
    rel_err: float = math.nan
    ftr: float = math.nan
    residual_rms: float = math.nan
    wall_ms: float = 0.0

def _check_truth(g_truth, g_n):
    g_truth = as_field(g_truth, 'ground truth')
    check_same_shape(g_truth, g_n)

    return g_truth

def relative_error(g_truth, g_n):
    """Relative RMS error ``||g - g_n|| / ||g||``.

    :raises ParameterError: If ``g_truth`` is identically zero.

    """

    g_truth = _check_truth(g_truth, g_n)
    truth_norm = rms_norm(g_truth)

    if truth_norm == 0:
        raise ParameterError('ground truth is identically zero')

    return rms_norm(g_truth - g_n) / truth_norm

def spectral_norm(img):
    """RMS over all frequencies of ``|fft2(img)|``."""

    return rms_norm(fft2(img).magnitude())

def ftr(g_truth, g_n, truth_norm=None):
    """Fourier transform ratio ``1 - ||fft(g_n)|| / ||fft(g)||``.

    A value near 1 means the reconstruction lacks most of the spectral
    energy of the truth; values much smaller than 1 mean high
    frequencies have been recovered.

    :param truth_norm: Precomputed :any:`spectral_norm` of ``g_truth``,
                       to avoid transforming the truth repeatedly.

    :raises ParameterError: If ``g_truth`` is identically zero.

    """

    if truth_norm is None:
        truth_norm = spectral_norm(_check_truth(g_truth, g_n))

    if truth_norm == 0:
        raise ParameterError('ground truth is identically zero')

    return 1.0 - spectral_norm(g_n) / truth_norm

def informative_mask(h, eps=DEFAULT_EPS):
    """Pixels where the residual estimate carries information (``h >= eps``)."""

    return np.asarray(h) >= eps

def estimate_residual(h, k, g_n, eps=DEFAULT_EPS):
    """Residual estimate ``1 - (k * g_n) / h`` of the image estimate ``g_n``.

    Pixels where ``h < eps`` are reported as 0 (see
    :any:`informative_mask`).

    """

    check_same_shape(h, g_n)

    residual = 1.0 - guarded_divide(convolve(g_n, k), h, eps)
    residual[~informative_mask(h, eps)] = 0.0

    return residual

def residual_field(h, k, rho_n, eps=DEFAULT_EPS):
    """Relative error estimate of the weight ``rho_n`` without ground truth.

    ``eps_n = 1 - k * (rho_n h) / h`` pointwise, 0 where ``h < eps``.

    """

    check_same_shape(h, rho_n)
    return estimate_residual(h, k, np.asarray(h) * rho_n, eps)

def omega_reach(alpha):
    """Spectral reach ``1 / alpha`` of the exponential regularization.

    :raises ParameterError: If ``alpha`` is not positive ("undefined reach").

    """

    if not alpha > 0:
        raise ParameterError(f'undefined reach for alpha={alpha}')

    return 1.0 / alpha

def ftr_spectrum_image(g_truth, g_n, eps=DEFAULT_EPS):
    """Per-frequency Fourier transform ratio map.

    Each pixel holds ``1 - |fft(g_n)| / max(|fft(g)|, eps)`` with DC at
    the raster center, clipped to ``[0, 1]``.

    """

    g_truth = _check_truth(g_truth, g_n)

    truth = np.abs(fft2(g_truth).centered())
    estimate = np.abs(fft2(g_n).centered())

    return np.clip(1.0 - estimate / np.maximum(truth, eps), 0.0, 1.0)
