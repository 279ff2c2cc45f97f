"""Single steps of the deconvolution iterations.

The Cauchy iterations evolve a weight field ``rho`` rather than the
image itself: the reconstruction is ``g = h * rho`` where ``h`` is
the observed image. Starting from the initial weight
``rho_0 = h / (k * h)``, each step maps the two most recent weights
to the next one.

Divisions by re-blurred estimates go through :any:`guarded_divide`.
Steps never clamp negative values.

"""

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ParameterError, ShapeError
from .fourier import convolve
from .grid import DEFAULT_EPS, Kernel, as_field, check_same_shape, guarded_divide
from .operators import laplacian, normalized_laplacian_term

@dataclass(frozen=True, eq=False)
class IterationState:
    """The two most recent weights of a two-step iteration.

    ``rho_prev`` is the weight at index ``n - 1`` and ``rho_curr`` the
    weight at index ``n``. ``h`` and ``k`` are the observed image and
    kernel. Instances are immutable; :any:`advance` and :any:`settle`
    return new states.

    """

    rho_prev: np.ndarray
    rho_curr: np.ndarray
    n: int
    h: np.ndarray
    k: Kernel

    def __post_init__(self):
        check_same_shape(self.rho_prev, self.rho_curr, self.h)

        if np.ndim(self.h) != 2:
            raise ShapeError('IterationState fields must be two dimensional')

        if self.n < 1:
            raise ParameterError(f'iteration index must be at least 1, got {self.n}')

    @classmethod
    def start(cls, h, k, eps=DEFAULT_EPS):
        """Create the bootstrap state ``rho_1 = rho_0 = h / (k * h)`` at ``n = 1``."""

        h = as_field(h, 'observed image')
        rho0 = initial_weight(h, k, eps)

        return cls(rho_prev=rho0, rho_curr=rho0, n=1, h=h, k=k)

    @property
    def reconstruction(self):
        """The image ``h * rho_curr``."""

        return self.h * self.rho_curr

    def advance(self, rho_next):
        """Shift the history by one: ``rho_curr`` becomes ``rho_prev``."""

        return replace(self, rho_prev=self.rho_curr, rho_curr=rho_next, n=self.n + 1)

    def settle(self, rho_next):
        """Advance a one-step iteration, which keeps a single weight.

        Both history entries are set to ``rho_next``, mirroring the
        bootstrap convention.

        """

        return replace(self, rho_prev=rho_next, rho_curr=rho_next, n=self.n + 1)

    def collapsed(self):
        """Return a state with ``rho_prev`` replaced by ``rho_curr``."""

        return replace(self, rho_prev=self.rho_curr)

def initial_weight(h, k, eps=DEFAULT_EPS):
    """Compute the initial weight ``rho_0 = h / (k * h)``.

    :param h: The observed image, nonnegative.
    :param k: The kernel.
    :param eps: Division guard.

    :raises ParameterError: If ``h`` has negative entries.

    """

    h = as_field(h, 'observed image')

    if np.any(h < 0):
        raise ParameterError('observed image must be nonnegative')

    return guarded_divide(h, convolve(h, k), eps)

def rl_standard_step(g_n, h, k, eps=DEFAULT_EPS):
    """One Richardson-Lucy step on the image estimate ``g_n``.

    ``g_{n+1} = g_n * (k * (h / (k * g_n)))``. For the symmetric
    kernels this library targets, correlation with ``k`` equals
    convolution, so ``k`` is applied twice by :any:`convolve`.

    """

    check_same_shape(g_n, h)

    ratio = guarded_divide(h, convolve(g_n, k), eps)
    return g_n * convolve(ratio, k)

def _correction_ratio(state, rho, eps):
    return guarded_divide(state.h, convolve(state.h * rho, state.k), eps)

def rl_weight_step(state, eps=DEFAULT_EPS):
    """Richardson-Lucy step in weight space with the two-step indices kept apart.

    ``rho_{n+1} = [(h / (k * (h rho_{n-1}))) * k] rho_n``.

    """

    ratio = _correction_ratio(state, state.rho_prev, eps)
    return convolve(ratio, state.k) * state.rho_curr

def _bracket(rho, alpha_n, n):
    return rho - (alpha_n * alpha_n / n) * laplacian(rho)

def cauchy_pure_step(state, alpha_n):
    """One step of the pure Cauchy sequence.

    ``rho_n = rho_{n-1} - (alpha_n**2 / n) laplacian(rho_{n-1})``, with
    ``rho_{n-1}`` read from ``state.rho_prev`` and ``n`` from
    ``state.n``. No convolution is involved.

    """

    return _bracket(state.rho_prev, alpha_n, state.n)

def cauchy_accel_step(state, alpha_n, eps=DEFAULT_EPS):
    """Cauchy step accelerated by the Richardson-Lucy propagator.

    ``rho_{n+1} = h / (k * (h rho_{n-1})) [rho_{n-1} - (alpha_n**2 / n) laplacian(rho_{n-1})]``.

    """

    ratio = _correction_ratio(state, state.rho_prev, eps)
    return ratio * _bracket(state.rho_prev, alpha_n, state.n)

def cauchy_convolved_step(state, alpha_n, eps=DEFAULT_EPS):
    """Cauchy step with the Richardson-Lucy ratio convolved with the kernel.

    ``rho_{n+1} = [(h / (k * (h rho_{n-1}))) * k] [rho_{n-1} - (alpha_n**2 / n) laplacian(rho_{n-1})]``.

    Unlike :any:`cauchy_noise_suppressed_step` the correction is not
    normalized and decays as ``1 / n``.

    """

    ratio = _correction_ratio(state, state.rho_prev, eps)
    return convolve(ratio, state.k) * _bracket(state.rho_prev, alpha_n, state.n)

def cauchy_noise_suppressed_step(state, alpha_n, p=1.0, eps=DEFAULT_EPS):
    """Cauchy step with the RMS-normalized Laplacian correction.

    ::

        r = h / (k * (h rho_n))
        L = laplacian(rho_{n-1})
        rho_{n+1} = (r * k) [rho_{n-1} - alpha_n**2 L / max(||L||**p, eps)]

    The ratio is convolved with ``k`` before multiplying the bracket.
    The ratio reads ``rho_n`` while the bracket reads ``rho_{n-1}``;
    pass ``state.collapsed()`` to use ``rho_n`` in both.

    """

    ratio = _correction_ratio(state, state.rho_curr, eps)
    term = normalized_laplacian_term(state.rho_prev, p)

    bracket = state.rho_prev - (alpha_n * alpha_n) * term.scaled(eps)
    return convolve(ratio, state.k) * bracket
