"""Deterministic smooth test images."""

import numpy as np

from .exceptions import ParameterError

SYNTH_COMPONENTS = 6
SYNTH_MAX_FREQUENCY = 4
SYNTH_RANGE = (0.1, 0.9)

def synth_image(size, seed=0):
    """Create a smooth periodic test image.

    The image is a sum of sinusoids with integer frequencies of at most
    four cycles per side, random phases and amplitudes, rescaled into
    ``[0.1, 0.9]``. Integer frequencies make the image exactly
    periodic, so it has no seams under circular convolution.

    The same ``size`` and ``seed`` always give the same image.

    :param size: Side length, or ``(height, width)``.
    :param seed: Seed of the random generator.

    :raises ParameterError: If a side is smaller than 1.

    """

    height, width = (size, size) if np.ndim(size) == 0 else size

    if height < 1 or width < 1:
        raise ParameterError(f'image size must be positive, got {width}x{height}')

    rng = np.random.default_rng(seed)

    y = np.arange(height, dtype=np.float64)[:, np.newaxis] / height
    x = np.arange(width, dtype=np.float64)[np.newaxis, :] / width

    img = np.zeros((height, width), dtype=np.float64)

    for _ in range(SYNTH_COMPONENTS):
        fy, fx = rng.integers(0, SYNTH_MAX_FREQUENCY + 1, size=2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amplitude = rng.uniform(0.5, 1.0)

        img += amplitude * np.cos(2.0 * np.pi * (fy * y + fx * x) + phase)

    low, high = SYNTH_RANGE
    span = img.max() - img.min()

    if span == 0:
        return np.full((height, width), 0.5 * (low + high))

    return low + (high - low) * (img - img.min()) / span
