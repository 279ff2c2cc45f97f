"""Multi-iteration driver for the deconvolution algorithms.

Algorithms are registered with the :any:`algorithm` decorator under
the names accepted by :any:`RunConfig.algorithm`. Weight-space
algorithms start from ``rho_0 = h / (k * h)`` with the bootstrap
``rho_1 = rho_0``; image-space algorithms (the Richardson-Lucy and
Von Neumann baselines) start from ``g_0 = h``.

"""

import logging
import math
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from .deconv import (
    IterationState,
    cauchy_accel_step,
    cauchy_convolved_step,
    cauchy_noise_suppressed_step,
    cauchy_pure_step,
    rl_standard_step,
    rl_weight_step,
)
from .exceptions import ConfigError, DivergenceError, ShapeError
from .grid import as_field, rms_norm
from .metrics import (
    IterationTrace,
    estimate_residual,
    ftr,
    omega_reach,
    relative_error,
    residual_field,
    spectral_norm,
)
from .operators import von_neumann_step

if TYPE_CHECKING:
    from .alpha_search import AlphaSearchConfig

WEIGHT_SPACE = 'weight'
IMAGE_SPACE = 'image'

ALGORITHMS = {}

class Algorithm:
    """A registered iteration.

    :param name: Name under which the algorithm is selected.

    :param step: For weight-space algorithms, a function of
                 ``(state, alpha_n, config)`` returning the next
                 weight. For image-space algorithms, a function of
                 ``(g_n, h, k, alpha_n, config)`` returning the next
                 image estimate.

    :param space: :any:`WEIGHT_SPACE` or :any:`IMAGE_SPACE`.

    :param two_step: Whether the step reads both history entries of
                     the :any:`IterationState`.

    """

    def __init__(self, name, step, space=WEIGHT_SPACE, two_step=True):
        self.name = name
        self.step = step
        self.space = space
        self.two_step = two_step

    def __repr__(self):
        return f'Algorithm({self.name!r}, space={self.space!r})'

def algorithm(fn=None, name=None, space=WEIGHT_SPACE, two_step=True):
    """Register ``fn`` as the step function of an algorithm.

    ``fn`` is registered under ``name``, or the name of ``fn`` if
    ``name`` is None.

    This function may be used as a decorator.

    """

    if fn is None:
        def decorator(fn):
            return algorithm(fn, name, space, two_step)

        return decorator

    key = name if name is not None else fn.__name__
    ALGORITHMS[key] = Algorithm(key, fn, space=space, two_step=two_step)

    return fn

@algorithm(name='rl', space=IMAGE_SPACE)
def _rl(g_n, h, k, alpha_n, config):
    return rl_standard_step(g_n, h, k, config.eps)

@algorithm(name='von-neumann', space=IMAGE_SPACE)
def _von_neumann(g_n, h, k, alpha_n, config):
    return von_neumann_step(g_n, h, k)

@algorithm(name='rl-weight')
def _rl_weight(state, alpha_n, config):
    return rl_weight_step(state, config.eps)

@algorithm(name='cauchy20', two_step=False)
def _cauchy20(state, alpha_n, config):
    return cauchy_pure_step(state, alpha_n)

@algorithm(name='cauchy25')
def _cauchy25(state, alpha_n, config):
    return cauchy_accel_step(state, alpha_n, config.eps)

@algorithm(name='cauchy27')
def _cauchy27(state, alpha_n, config):
    return cauchy_convolved_step(state, alpha_n, config.eps)

@algorithm(name='cauchy31')
def _cauchy31(state, alpha_n, config):
    return cauchy_noise_suppressed_step(state, alpha_n, config.p, config.eps)


@dataclass(frozen=True)
class AlphaPolicy:
    """How the regularization length ``alpha_n`` is chosen per iteration.

    - ``constant``: ``alpha`` at every iteration.
    - ``schedule``: ``schedule[n - 1]`` at iteration ``n``.
    - ``grid-search``: ``alpha`` before iteration ``search_at``; from
      then on the value selected by :any:`search_alpha` with the
      :any:`AlphaSearchConfig` in ``search``.

    """

    mode: str = 'constant'
    alpha: float = 0.0
    schedule: Tuple[float, ...] = ()
    search: Optional['AlphaSearchConfig'] = None
    search_at: int = 1

    MODES = ('constant', 'schedule', 'grid-search')

    def validate(self, iterations):
        """Raise :any:`ConfigError` if the policy cannot drive ``iterations`` iterations."""

        if self.mode not in self.MODES:
            raise ConfigError(f'unknown alpha mode {self.mode!r}, expected one of {self.MODES}')

        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ConfigError(f'alpha must be finite and nonnegative, got {self.alpha}')

        if self.mode == 'schedule':
            if len(self.schedule) < iterations:
                raise ConfigError(
                    f'alpha schedule has {len(self.schedule)} entries for {iterations} iterations'
                )

            if not all(math.isfinite(a) and a >= 0 for a in self.schedule):
                raise ConfigError('alpha schedule entries must be finite and nonnegative')

        if self.mode == 'grid-search':
            if self.search is None:
                raise ConfigError('grid-search alpha policy requires a search configuration')

            self.search.validate()

            if self.search_at < 1:
                raise ConfigError(f'search_at must be at least 1, got {self.search_at}')


@dataclass(frozen=True, eq=False)
class RunResult:
    """Outcome of :any:`run`.

    ``rho`` is the final weight field, or None for image-space
    algorithms. ``alpha`` is the last regularization length used.

    """

    traces: Tuple[IterationTrace, ...]
    image: np.ndarray
    rho: Optional[np.ndarray] = None
    alpha: float = 0.0

class _AlphaSource:
    """Yields ``alpha_n`` per iteration, running the grid search when due."""

    def __init__(self, config, h, k):
        self.config = config
        self.policy = config.alpha_policy
        self.h = h
        self.k = k
        self.selected = None

    def __call__(self, n):
        policy = self.policy

        if policy.mode == 'schedule':
            return float(policy.schedule[n - 1])

        if policy.mode == 'grid-search' and n >= policy.search_at:
            if self.selected is None:
                self.selected = self._search()

            return self.selected

        return float(policy.alpha)

    def _search(self):
        from .alpha_search import search_alpha

        alpha, score = search_alpha(
            self.h, self.k, self.policy.search,
            self.config.algorithm, self.config.p,
            base=self.config
        )

        logging.info('Selected alpha=%g (residual RMS %g)', alpha, score)
        return alpha

# Estimates with larger magnitudes count as diverged even while still finite
MAGNITUDE_LIMIT = 1e100

def _diverged(image, rho):
    with np.errstate(invalid='ignore'):
        return not (np.all(np.abs(image) <= MAGNITUDE_LIMIT) and
                    (rho is None or np.all(np.abs(rho) <= MAGNITUDE_LIMIT)))

def _finite(trace, has_truth):
    values = (trace.residual_rms, trace.rel_err, trace.ftr) if has_truth else (trace.residual_rms,)
    return all(math.isfinite(v) for v in values)

def _measure(n, alpha_n, image, rho, h, k, config, g_truth, truth_norm, wall_ms):
    if rho is not None:
        residual = residual_field(h, k, rho, config.eps)

    else:
        residual = estimate_residual(h, k, image, config.eps)

    rel_err = ftr_value = math.nan

    if g_truth is not None:
        rel_err = relative_error(g_truth, image)
        ftr_value = ftr(g_truth, image, truth_norm=truth_norm)

    return IterationTrace(
        n=n,
        alpha_n=alpha_n,
        rel_err=rel_err,
        ftr=ftr_value,
        residual_rms=rms_norm(residual),
        wall_ms=wall_ms
    )

def run(config, h, k, g_truth=None):
    """Run the iteration selected by ``config`` on the observed image ``h``.

    After every iteration an :any:`IterationTrace` is recorded. The
    relative error and FTR require ``g_truth``; the residual estimate
    does not.

    :param config: The run configuration.
    :type config: RunConfig

    :param h: The observed image.
    :param k: The kernel.
    :type k: Kernel

    :param g_truth: Optional ground truth image.

    :returns: The traces and the final reconstruction. For weight-space
              algorithms the reconstruction is exactly ``h * rho``.

    :rtype: RunResult

    :raises ConfigError: If ``config`` is inconsistent.

    :raises DivergenceError: If an iteration produces non-finite
                             values, values larger in magnitude than
                             :any:`MAGNITUDE_LIMIT`, or non-finite
                             metrics. The exception carries the traces
                             recorded so far.

    """

    config.validate()

    selected = ALGORITHMS[config.algorithm]
    h = as_field(h, 'observed image')

    truth_norm = None

    if g_truth is not None:
        g_truth = as_field(g_truth, 'ground truth')

        if g_truth.shape != h.shape:
            raise ShapeError(f'ground truth shape {g_truth.shape} differs from image shape {h.shape}')

        truth_norm = spectral_norm(g_truth)

    alpha_source = _AlphaSource(config, h, k)

    state = None
    rho = None

    if selected.space == WEIGHT_SPACE:
        state = IterationState.start(h, k, config.eps)
        rho = state.rho_curr
        image = state.reconstruction

    else:
        image = h.copy()

    traces = []
    alpha_n = float(config.alpha_policy.alpha)

    for n in range(1, config.iterations + 1):
        alpha_n = alpha_source(n)
        started = time.perf_counter()

        with np.errstate(all='ignore'):
            if state is not None:
                source = state.collapsed() if (config.collapse_indices and selected.two_step) else state
                rho_next = selected.step(source, alpha_n, config)

                state = state.advance(rho_next) if selected.two_step else state.settle(rho_next)
                rho = state.rho_curr
                image = state.reconstruction

            else:
                image = selected.step(image, h, k, alpha_n, config)

        wall_ms = (time.perf_counter() - started) * 1000.0 if config.timing else 0.0

        if _diverged(image, rho):
            logging.debug('%s diverged at iteration %d', selected.name, n)
            raise DivergenceError(n, selected.name, traces)

        with np.errstate(all='ignore'):
            trace = _measure(n, alpha_n, image, rho, h, k, config, g_truth, truth_norm, wall_ms)

        if not _finite(trace, g_truth is not None):
            logging.debug('%s produced non-finite metrics at iteration %d', selected.name, n)
            raise DivergenceError(n, selected.name, traces)

        traces.append(trace)

        logging.debug('%s iteration %d: alpha=%g residual=%g rel_err=%g',
                      selected.name, n, alpha_n, trace.residual_rms, trace.rel_err)

    if alpha_n > 0:
        logging.info('%s: %d iterations, alpha=%g, reach=%g',
                     selected.name, config.iterations, alpha_n, omega_reach(alpha_n))

    else:
        logging.info('%s: %d iterations, alpha=0', selected.name, config.iterations)

    return RunResult(traces=tuple(traces), image=image, rho=rho, alpha=alpha_n)
