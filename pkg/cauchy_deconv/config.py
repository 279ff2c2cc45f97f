"""Run configuration.

A :any:`RunConfig` collects every parameter of one deconvolution run
together with the files it reads and writes. It can be built directly,
loaded from a JSON file whose keys mirror the field names, and updated
with values given on the command line.

.. code-block:: json

   {
     "algorithm": "cauchy31",
     "iterations": 64,
     "p": 1.0,
     "alpha_policy": {
       "mode": "grid-search",
       "candidates": [0.25, 0.5, 1.0, 2.0],
       "probe_iterations": 16
     }
   }

"""

import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .alpha_search import AlphaSearchConfig
from .driver import ALGORITHMS, AlphaPolicy
from .exceptions import ConfigError
from .grid import DEFAULT_EPS

DEFAULT_ALGORITHM = 'cauchy31'
DEFAULT_ITERATIONS = 256

POLICY_KEYS = ('mode', 'alpha', 'schedule', 'candidates', 'probe_iterations', 'score_at', 'search_at')

@dataclass(frozen=True)
class RunConfig:
    """Parameters and files of one run.

    Path fields are optional; the library only reads the numerical
    parameters, the command line uses the paths.

    """

    algorithm: str = DEFAULT_ALGORITHM
    iterations: int = DEFAULT_ITERATIONS
    alpha_policy: AlphaPolicy = field(default_factory=AlphaPolicy)
    p: float = 1.0
    eps: float = DEFAULT_EPS
    collapse_indices: bool = False
    timing: bool = False

    observed: Optional[str] = None
    kernel: Optional[str] = None
    truth: Optional[str] = None

    output_image: Optional[str] = None
    output_trace: Optional[str] = None
    output_spectrum: Optional[str] = None

    seed: int = 0

    PATH_FIELDS = ('observed', 'kernel', 'truth', 'output_image', 'output_trace', 'output_spectrum')

    def paths(self):
        """The path fields that are set, as a ``name -> path`` dict."""

        return {name: getattr(self, name) for name in self.PATH_FIELDS if getattr(self, name) is not None}

    def validate(self):
        """Raise :any:`ConfigError` if the configuration is inconsistent."""

        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f'unknown algorithm {self.algorithm!r}, expected one of {sorted(ALGORITHMS)}')

        if isinstance(self.iterations, bool) or not isinstance(self.iterations, int) or self.iterations < 0:
            raise ConfigError(f'iterations must be a nonnegative integer, got {self.iterations!r}')

        if not (math.isfinite(self.eps) and self.eps > 0):
            raise ConfigError(f'eps must be positive, got {self.eps}')

        if not math.isfinite(self.p):
            raise ConfigError(f'p must be finite, got {self.p}')

        paths = list(self.paths().values())

        if len(set(paths)) != len(paths):
            raise ConfigError('input and output paths must be distinct')

        self.alpha_policy.validate(self.iterations)

    def with_overrides(self, **values):
        """Return a copy with every non-None value in ``values`` applied."""

        return replace(self, **{k: v for k, v in values.items() if v is not None})

def _convert(name, value, kind):
    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError(value)

            return value

        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise TypeError(value)

            return int(value)

        if kind is float:
            if isinstance(value, bool):
                raise TypeError(value)

            return float(value)

        if value is not None and not isinstance(value, str):
            raise TypeError(value)

        return value

    except (TypeError, ValueError):
        raise ConfigError(f'invalid value for {name}: {value!r}') from None

def policy_from_mapping(data):
    """Build an :any:`AlphaPolicy` from a config-file object.

    Keys: ``mode``, ``alpha``, ``schedule``, ``candidates``,
    ``probe_iterations``, ``score_at`` and ``search_at``. The mode
    defaults to ``grid-search`` when ``candidates`` is given, to
    ``schedule`` when ``schedule`` is given and to ``constant``
    otherwise.

    :raises ConfigError: On unknown keys or invalid values.

    """

    if not isinstance(data, dict):
        raise ConfigError('alpha_policy must be an object')

    unknown = set(data) - set(POLICY_KEYS)

    if unknown:
        raise ConfigError(f'unknown alpha_policy keys: {sorted(unknown)}')

    if 'mode' in data:
        mode = data['mode']

    elif 'candidates' in data:
        mode = 'grid-search'

    elif 'schedule' in data:
        mode = 'schedule'

    else:
        mode = 'constant'

    search = None

    if 'candidates' in data:
        search = AlphaSearchConfig(
            candidates=tuple(_convert('candidates', a, float) for a in data['candidates']),
            probe_iterations=_convert('probe_iterations', data.get('probe_iterations', 16), int),
            score_at=_convert('score_at', data['score_at'], int) if data.get('score_at') is not None else None
        )

    return AlphaPolicy(
        mode=mode,
        alpha=_convert('alpha', data.get('alpha', 0.0), float),
        schedule=tuple(_convert('schedule', a, float) for a in data.get('schedule', ())),
        search=search,
        search_at=_convert('search_at', data.get('search_at', 1), int)
    )

_FIELD_TYPES = {
    'algorithm': str,
    'iterations': int,
    'p': float,
    'eps': float,
    'collapse_indices': bool,
    'timing': bool,
    'seed': int,
}

def config_from_mapping(data, base=None):
    """Build a :any:`RunConfig` from a mapping of field names to values.

    Fields missing from ``data`` are taken from ``base``, or the
    defaults if ``base`` is None.

    :raises ConfigError: On unknown keys or values of the wrong type.

    """

    if not isinstance(data, dict):
        raise ConfigError('configuration must be an object')

    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known

    if unknown:
        raise ConfigError(f'unknown configuration keys: {sorted(unknown)}')

    values = {}

    for name, value in data.items():
        if name == 'alpha_policy':
            values[name] = policy_from_mapping(value)

        else:
            values[name] = _convert(name, value, _FIELD_TYPES.get(name, str))

    return replace(base if base is not None else RunConfig(), **values)

def load_config(path):
    """Load a :any:`RunConfig` from the JSON file at ``path``.

    :raises OSError: If the file cannot be read.
    :raises ConfigError: If the file is not valid JSON or has invalid keys.

    """

    with open(path, encoding='utf-8') as f:
        try:
            data = json.load(f)

        except json.JSONDecodeError as e:
            raise ConfigError(f'{path}: {e}') from None

    return config_from_mapping(data)
