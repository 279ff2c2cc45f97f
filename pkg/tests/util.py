## Utilities used for testing

import math

import numpy as np

from cauchy_deconv import Kernel, convolve, gaussian_kernel

def direct_circular_convolve(img, kernel):
    """Circularly convolve `img` with `kernel` by direct summation over the kernel entries.

    Each entry at offset `(dy, dx)` from the kernel center contributes
    `k[dy, dx] * img[y - dy, x - dx]` with indices taken modulo the
    image size. Independent of any FFT code.

    """

    data = kernel.data if isinstance(kernel, Kernel) else np.asarray(kernel)
    cy, cx = data.shape[0] // 2, data.shape[1] // 2

    result = np.zeros(np.shape(img))

    for i in range(data.shape[0]):
        for j in range(data.shape[1]):
            result += data[i, j] * np.roll(img, (i - cy, j - cx), axis=(0, 1))

    return result

def naive_laplacian(f):
    """5-point Laplacian with periodic wrap, one pixel at a time."""

    rows, cols = f.shape
    result = np.zeros_like(f)

    for y in range(rows):
        for x in range(cols):
            result[y, x] = (
                f[(y - 1) % rows, x] + f[(y + 1) % rows, x] +
                f[y, (x - 1) % cols] + f[y, (x + 1) % cols] -
                4.0 * f[y, x]
            )

    return result

def product_multiplier(x, n):
    """The product of `1 + x/m` for `m = 1 .. n`, by scalar recurrence."""

    result = 1.0
    m = 1

    while m <= n:
        result = result + result * x / m
        m += 1

    return result

def random_kernel(side, rng):
    """Random kernel of size `side x side` with positive entries, normalized to unit sum."""

    return Kernel(rng.uniform(0.1, 1.0, size=(side, side)))

def smooth_image(shape, rng, components=4):
    """Smooth positive periodic image built from a few low-frequency cosines."""

    rows, cols = shape

    y = np.arange(rows)[:, np.newaxis] / rows
    x = np.arange(cols)[np.newaxis, :] / cols

    img = np.full(shape, 2.0 * components)

    for _ in range(components):
        fy, fx = rng.integers(0, 3, size=2)
        img += rng.uniform(0.5, 1.0) * np.cos(2 * np.pi * (fy * y + fx * x) + rng.uniform(0, 2 * np.pi))

    return img / img.max()

def rms_relative(a, b):
    """RMS of `a - b` relative to the RMS of `b`."""

    return np.sqrt(np.mean((a - b) ** 2)) / np.sqrt(np.mean(b ** 2))

def blurred_instance(size=32, sigma=1.5, radius=4, seed=0):
    """A smooth ground truth, its Gaussian blur and the kernel.

    Returns `(truth, observed, kernel)`.

    """

    rng = np.random.default_rng(seed)

    truth = smooth_image((size, size), rng)
    k = gaussian_kernel(sigma, radius)

    return truth, convolve(truth, k), k

def traces_equal(a, b):
    """Compare two trace sequences field by field, treating NaN entries as equal."""

    if len(a) != len(b):
        return False

    def same(x, y):
        return x == y or (math.isnan(x) and math.isnan(y))

    return all(
        s.n == t.n and all(same(getattr(s, name), getattr(t, name))
                           for name in ('alpha_n', 'rel_err', 'ftr', 'residual_rms', 'wall_ms'))
        for s, t in zip(a, b)
    )
