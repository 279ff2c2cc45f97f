from .grid import Kernel, guarded_divide, rms_norm
from .fourier import convolve, fft2, ifft2, power_spectrum_image, workers
from .kernels import delta_kernel, gaussian_kernel, is_symmetric
from .operators import exp_limit_apply, exp_limit_spectral, laplacian, von_neumann_step
from .deconv import IterationState, initial_weight
from .driver import AlphaPolicy, RunResult, run
from .metrics import IterationTrace, ftr, ftr_spectrum_image, omega_reach, relative_error, residual_field
from .alpha_search import AlphaSearchConfig, search_alpha
from .config import RunConfig, load_config
from .files import load_image, load_kernel, read_trace, save_image, save_kernel, write_trace
from .synth import synth_image
from .exceptions import DeconvError, DivergenceError

__all__ = [
    'Kernel',
    'guarded_divide',
    'rms_norm',

    'convolve',
    'fft2',
    'ifft2',
    'power_spectrum_image',
    'workers',

    'gaussian_kernel',
    'delta_kernel',
    'is_symmetric',

    'laplacian',
    'exp_limit_apply',
    'exp_limit_spectral',
    'von_neumann_step',

    'IterationState',
    'initial_weight',

    'AlphaPolicy',
    'RunResult',
    'run',

    'IterationTrace',
    'relative_error',
    'ftr',
    'residual_field',
    'omega_reach',
    'ftr_spectrum_image',

    'AlphaSearchConfig',
    'search_alpha',

    'RunConfig',
    'load_config',

    'load_image',
    'save_image',
    'load_kernel',
    'save_kernel',
    'write_trace',
    'read_trace',

    'synth_image',

    'DeconvError',
    'DivergenceError'
]
