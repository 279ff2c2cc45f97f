import numpy as np
import pytest

from cauchy_deconv import Kernel, convolve, delta_kernel, fft2, ifft2, power_spectrum_image
from cauchy_deconv.exceptions import EmptyInputError, KernelError, ShapeError
from cauchy_deconv.fourier import Spectrum, circular_convolve, pad_kernel, thread_count, workers
from util import direct_circular_convolve, random_kernel, rms_relative

class TestTransforms:
    """Test the forward and inverse DFT."""

    def test_constant_image(self):
        """Test that a constant image has DC = c*W*H and no other energy."""

        spectrum = fft2(np.full((4, 6), 2.5)).coefficients

        assert spectrum[0, 0] == pytest.approx(2.5 * 24)

        spectrum[0, 0] = 0
        assert np.allclose(spectrum, 0, atol=1e-12)

    def test_delta_at_origin(self):
        """Test that a delta at the origin has an all-ones spectrum."""

        img = np.zeros((8, 8))
        img[0, 0] = 1.0

        assert np.allclose(fft2(img).coefficients, 1.0, atol=1e-15)

    def test_round_trip(self, rng):
        """Test that ifft2(fft2(img)) reproduces img."""

        img = rng.normal(size=(8, 8))
        assert rms_relative(ifft2(fft2(img)), img) < 1e-12

    def test_hermitian_symmetry(self, rng):
        """Test that the spectrum of a real image is Hermitian."""

        c = fft2(rng.normal(size=(6, 10))).coefficients
        mirrored = np.conj(np.roll(c[::-1, ::-1], (1, 1), axis=(0, 1)))

        assert np.allclose(c, mirrored, atol=1e-12)

    def test_empty_input(self):
        """Test that transforming an empty raster raises EmptyInputError."""

        with pytest.raises(EmptyInputError):
            fft2(np.zeros((0, 4)))

        with pytest.raises(EmptyInputError):
            ifft2(Spectrum(np.zeros((0, 4))))

    def test_spectrum_geometry(self):
        """Test width and height of a Spectrum."""

        s = fft2(np.ones((3, 5)))
        assert (s.height, s.width) == (3, 5)

class TestConvolve:
    """Test circular convolution."""

    def test_delta_kernel(self, rng):
        """Test that convolving with the delta kernel is the identity."""

        img = rng.uniform(size=(16, 16))
        assert rms_relative(convolve(img, delta_kernel()), img) < 1e-12

    def test_constant_image(self, rng):
        """Test that a unit-sum kernel maps a constant image to itself."""

        out = convolve(np.full((16, 16), 0.3), random_kernel(5, rng))
        assert np.allclose(out, 0.3, rtol=1e-12)

    def test_off_center_delta_shifts(self):
        """Test that a delta one pixel right of center shifts the image right with wrap."""

        data = np.zeros((3, 3))
        data[1, 2] = 1.0

        img = np.arange(16.0).reshape(4, 4)
        assert np.allclose(convolve(img, Kernel(data)), np.roll(img, 1, axis=1), atol=1e-12)

    @pytest.mark.parametrize('seed', range(100))
    def test_matches_direct_convolution(self, seed):
        """Test FFT convolution against direct spatial summation on random instances."""

        rng = np.random.default_rng(seed)

        size = int(rng.choice([8, 16, 32]))
        side = int(rng.choice([s for s in (3, 5, 9) if s <= size]))

        img = rng.uniform(size=(size, size))
        k = random_kernel(side, rng)

        assert rms_relative(convolve(img, k), direct_circular_convolve(img, k)) < 1e-10

    @pytest.mark.parametrize('seed', range(20))
    def test_conserves_mean(self, seed):
        """Test that a unit-sum kernel preserves the image mean."""

        rng = np.random.default_rng(seed)

        img = rng.uniform(size=(16, 16))
        k = random_kernel(5, rng)

        assert convolve(img, k).mean() == pytest.approx(img.mean(), rel=1e-12)

    def test_linear(self, rng):
        """Test that convolve(a*x + b*y, k) == a*convolve(x, k) + b*convolve(y, k)."""

        x = rng.normal(size=(16, 16))
        y = rng.normal(size=(16, 16))
        k = random_kernel(5, rng)

        lhs = convolve(2.0 * x - 3.0 * y, k)
        rhs = 2.0 * convolve(x, k) - 3.0 * convolve(y, k)

        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_commutative(self, rng):
        """Test that two padded kernels convolve in either order to the same result."""

        a = pad_kernel(random_kernel(3, rng), (8, 8))
        b = pad_kernel(random_kernel(5, rng), (8, 8))

        assert np.array_equal(circular_convolve(a, b), circular_convolve(b, a))

    def test_kernel_larger_than_image(self):
        """Test that a kernel larger than the image raises KernelError."""

        with pytest.raises(KernelError):
            convolve(np.ones((4, 4)), Kernel(np.ones((5, 5))))

    def test_circular_convolve_shape_mismatch(self):
        """Test that circular_convolve requires equal shapes."""

        with pytest.raises(ShapeError):
            circular_convolve(np.ones((4, 4)), np.ones((4, 5)))

    def test_pad_kernel_center_at_origin(self, rng):
        """Test that pad_kernel moves the kernel center to index (0, 0)."""

        k = random_kernel(3, rng)
        padded = pad_kernel(k, (6, 6))

        assert padded[0, 0] == k.data[1, 1]
        assert padded[-1, -1] == k.data[0, 0]
        assert padded.sum() == pytest.approx(1.0)

class TestThreads:
    """Test worker thread control."""

    def test_default_all_cpus(self, monkeypatch):
        """Test that an unset DECONV_THREADS means one worker per CPU."""

        monkeypatch.delenv('DECONV_THREADS', raising=False)
        assert thread_count() == -1

    def test_environment(self, threads):
        """Test that DECONV_THREADS sets the worker count."""

        threads(3)
        assert thread_count() == 3

        threads(0)
        assert thread_count() == -1

    def test_invalid_environment(self, threads):
        """Test that an invalid DECONV_THREADS value is ignored."""

        threads('many')
        assert thread_count() == -1

    def test_workers_context(self, threads):
        """Test that workers() overrides the environment and restores it on exit."""

        threads(2)

        with workers(1):
            assert thread_count() == 1

        assert thread_count() == 2

    def test_results_independent_of_threads(self, rng):
        """Test that convolution results are bit-identical for every worker count."""

        img = rng.uniform(size=(64, 64))
        k = random_kernel(9, rng)

        with workers(1):
            single = convolve(img, k)

        with workers(4):
            multi = convolve(img, k)

        assert np.array_equal(single, multi)

class TestPowerSpectrum:
    """Test the display power spectrum."""

    def test_constant_image(self):
        """Test that a constant image has a single nonzero pixel at the center."""

        out = power_spectrum_image(np.full((8, 8), 1.0))

        assert out[4, 4] > 0
        out[4, 4] = 0
        assert np.allclose(out, 0, atol=1e-12)

    def test_sinusoid_peaks(self):
        """Test that a sinusoid of frequency (2, 0) gives two symmetric peaks."""

        y = np.arange(16)[:, np.newaxis]
        img = np.cos(2 * np.pi * 2 * y / 16) * np.ones((1, 16))

        out = power_spectrum_image(img)
        peaks = set(zip(*np.nonzero(out > 1e-6)))

        assert peaks == {(6, 8), (10, 8)}

    def test_rotational_symmetry(self, rng):
        """Test that the power spectrum of an odd-size real image is symmetric under 180 degree rotation."""

        out = power_spectrum_image(rng.normal(size=(9, 11)))
        assert np.allclose(out, out[::-1, ::-1], atol=1e-10)
