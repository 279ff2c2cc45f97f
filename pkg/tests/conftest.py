import numpy as np
import pytest

from cauchy_deconv import gaussian_kernel, synth_image

def pytest_addoption(parser):
    parser.addoption('--update-golden', action='store_true', help='rewrite the golden trace files')

def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long running protocol test')

@pytest.fixture()
def rng():
    """A seeded random generator, fresh for every test."""

    return np.random.default_rng(12345)

@pytest.fixture(scope='session')
def protocol_fixture():
    """The 128x128 synthetic truth (seed 42), Gaussian kernel (sigma 2, radius 6) and blurred image."""

    from cauchy_deconv import convolve

    truth = synth_image(128, 42)
    k = gaussian_kernel(2.0, 6)

    return truth, convolve(truth, k), k

@pytest.fixture()
def threads(monkeypatch):
    """Set DECONV_THREADS for the duration of a test."""

    def set_threads(value):
        monkeypatch.setenv('DECONV_THREADS', str(value))

    return set_threads
