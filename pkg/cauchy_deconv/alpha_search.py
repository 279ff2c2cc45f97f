"""Selection of a constant regularization length by grid search.

Each candidate ``alpha`` is scored by running the chosen algorithm for
a short probe with that constant ``alpha`` and measuring the RMS of the
residual estimate, which needs no ground truth. The candidate with the
smallest score wins; ties go to the smallest ``alpha``.

"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from .exceptions import ConfigError, DivergenceError
from .fourier import thread_count, workers

@dataclass(frozen=True)
class AlphaSearchConfig:
    """Parameters of :any:`search_alpha`.

    :param candidates: Strictly increasing, finite, nonnegative values
                       of ``alpha`` to try.

    :param probe_iterations: Iterations run per candidate.

    :param score_at: Iteration at which the residual is measured.
                     Defaults to ``probe_iterations``.

    """

    candidates: Tuple[float, ...]
    probe_iterations: int = 16
    score_at: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'candidates', tuple(float(a) for a in self.candidates))

    @property
    def score_iteration(self):
        return self.probe_iterations if self.score_at is None else self.score_at

    def validate(self):
        """Raise :any:`ConfigError` if the search cannot be carried out."""

        if not self.candidates:
            raise ConfigError('alpha search requires at least one candidate')

        if not all(math.isfinite(a) and a >= 0 for a in self.candidates):
            raise ConfigError('alpha candidates must be finite and nonnegative')

        if any(b <= a for a, b in zip(self.candidates, self.candidates[1:])):
            raise ConfigError('alpha candidates must be distinct and sorted')

        if self.probe_iterations < 1:
            raise ConfigError(f'probe_iterations must be positive, got {self.probe_iterations}')

        if not 1 <= self.score_iteration <= self.probe_iterations:
            raise ConfigError(
                f'score_at must lie in [1, {self.probe_iterations}], got {self.score_iteration}'
            )


class ProbeResult:
    """Score of one candidate, or the divergence that prevented scoring.

    A probe that diverged has ``score == inf`` and holds the
    :any:`DivergenceError` in ``error``.

    """

    def __init__(self, alpha, score=math.inf, error=None):
        self.alpha = alpha
        self.score = score
        self.error = error

    @classmethod
    def wrap(cls, alpha, compute):
        """Call ``compute()`` and wrap its score.

        Divergence, and scores that are not finite, yield a result
        scoring ``inf``. Other exceptions propagate.

        """

        try:
            score = compute()

        except DivergenceError as e:
            logging.debug('Probe with alpha=%g diverged', alpha, exc_info=True)
            return cls(alpha, error=e)

        if not math.isfinite(score):
            return cls(alpha)

        return cls(alpha, score)

    @property
    def key(self):
        """Sort key: lower scores first, then smaller ``alpha``."""

        return (self.score, self.alpha)

    def __repr__(self):
        return f'ProbeResult(alpha={self.alpha!r}, score={self.score!r})'

def _probe_config(base, cfg, algorithm, p, alpha):
    from .config import RunConfig
    from .driver import AlphaPolicy

    if base is None:
        base = RunConfig()

    return replace(
        base,
        algorithm=algorithm,
        p=p,
        iterations=cfg.probe_iterations,
        alpha_policy=AlphaPolicy(mode='constant', alpha=float(alpha)),
        timing=False
    )

def score_alpha(h, k, cfg, algorithm, p, alpha, base=None):
    """Residual RMS after a probe run with constant ``alpha``.

    :param base: :any:`RunConfig` supplying ``eps`` and
                 ``collapse_indices`` for the probe. The defaults are
                 used if *None*.

    :returns: The RMS of the residual estimate at iteration
              ``cfg.score_at``.

    :raises DivergenceError: If the probe produces non-finite values.

    """

    from .driver import run

    config = _probe_config(base, cfg, algorithm, p, alpha)
    result = run(config, h, k)

    return result.traces[cfg.score_iteration - 1].residual_rms

def probe_all(h, k, cfg, algorithm, p, base=None, max_workers=None):
    """Score every candidate of ``cfg``.

    Probes run in a thread pool of ``max_workers`` threads when it is
    greater than one, sequentially otherwise. Every probe uses the FFT
    worker count in effect in the calling thread.

    :returns: A list of :any:`ProbeResult`, in candidate order.

    """

    cfg.validate()
    count = thread_count()

    def probe(alpha):
        with workers(count):
            return ProbeResult.wrap(alpha, lambda: score_alpha(h, k, cfg, algorithm, p, alpha, base))

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            return list(executor.map(probe, cfg.candidates))

    return [probe(alpha) for alpha in cfg.candidates]

def search_alpha(h, k, cfg, algorithm, p, base=None, max_workers=None):
    """Select the candidate ``alpha`` with the smallest probe residual.

    :param h: The observed image.
    :param k: The kernel.
    :param cfg: The candidates and probe length.
    :type cfg: AlphaSearchConfig

    :param algorithm: Name of the registered algorithm to probe.
    :param p: Norm exponent passed to the algorithm.

    :param max_workers: Number of probes run concurrently.

    :returns: ``(alpha, score)``. If every probe diverged the smallest
              candidate is returned with score ``inf``.

    :raises ConfigError: If ``cfg`` is invalid.

    """

    results = probe_all(h, k, cfg, algorithm, p, base=base, max_workers=max_workers)
    best = min(results, key=lambda r: r.key)

    for r in results:
        logging.debug('alpha=%g: residual RMS %g', r.alpha, r.score)

    if math.isinf(best.score):
        logging.warning('Every alpha candidate diverged, using alpha=%g', best.alpha)

    return best.alpha, best.score

def search_alpha_p(h, k, cfg, algorithm, p_values, base=None, max_workers=None):
    """Nested search: an alpha grid search for each norm exponent in ``p_values``.

    :returns: ``(alpha, p, score)`` of the best pair. Ties go to the
              smaller ``alpha``, then the earlier ``p``.

    :raises ConfigError: If ``p_values`` is empty or ``cfg`` is invalid.

    """

    p_values = tuple(p_values)

    if not p_values:
        raise ConfigError('p search requires at least one value')

    best = None

    for p in p_values:
        alpha, score = search_alpha(h, k, cfg, algorithm, p, base=base, max_workers=max_workers)
        logging.info('p=%g: alpha=%g, residual RMS %g', p, alpha, score)

        if best is None or (score, alpha) < (best[2], best[0]):
            best = (alpha, p, score)

    return best
