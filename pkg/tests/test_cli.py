import json
import os

import numpy as np
import pytest

from cauchy_deconv import initial_weight, load_image, load_kernel, read_trace
from cauchy_deconv.cli import EXIT_DIVERGENCE, EXIT_INPUT, EXIT_OK, EXIT_OUTPUT, EXIT_USAGE, main, make_parser
from cauchy_deconv.files import quantize

@pytest.fixture()
def workdir(tmp_path):
    """A directory with a 32x32 synthetic truth, a Gaussian kernel and the blurred image."""

    truth = str(tmp_path / 'truth.pgm')
    observed = str(tmp_path / 'observed.pgm')
    kernel = str(tmp_path / 'psf.txt')

    assert main(['synth', '--size', '32', '--seed', '7', '--out', truth]) == EXIT_OK
    assert main([
        'blur', '--in', truth, '--sigma', '1.5', '--radius', '4',
        '--save-kernel', kernel, '--out', observed
    ]) == EXIT_OK

    return tmp_path

def paths(workdir):
    return str(workdir / 'truth.pgm'), str(workdir / 'observed.pgm'), str(workdir / 'psf.txt')

class TestSynthAndBlur:
    """Test the synth and blur commands."""

    def test_synth(self, tmp_path):
        """Test that synth writes a 16-bit image of the requested size in [0.1, 0.9]."""

        out = str(tmp_path / 'truth.pgm')

        assert main(['synth', '--size', '24', '--out', out]) == EXIT_OK

        img, maxval = load_image(out, return_maxval=True)

        assert img.shape == (24, 24)
        assert maxval == 65535
        assert img.min() >= 0.1 - 1e-4 and img.max() <= 0.9 + 1e-4

    def test_synth_deterministic(self, tmp_path):
        """Test that the same seed gives the same bytes."""

        a = tmp_path / 'a.pgm'
        b = tmp_path / 'b.pgm'

        main(['synth', '--size', '16', '--seed', '3', '--out', str(a)])
        main(['synth', '--size', '16', '--seed', '3', '--out', str(b)])

        assert a.read_bytes() == b.read_bytes()

    def test_blur_delta(self, tmp_path):
        """Test that blurring with the delta kernel reproduces the input bytes."""

        truth = tmp_path / 'truth.pgm'
        delta = tmp_path / 'delta.txt'
        out = tmp_path / 'out.pgm'

        main(['synth', '--size', '20', '--out', str(truth)])
        delta.write_text('1 1\n1.0\n')

        assert main(['blur', '--in', str(truth), '--kernel', str(delta), '--out', str(out)]) == EXIT_OK
        assert out.read_bytes() == truth.read_bytes()

    def test_blur_saves_kernel(self, workdir):
        """Test that the Gaussian kernel used is written."""

        k = load_kernel(paths(workdir)[2])
        assert k.shape == (9, 9)

    def test_blur_requires_kernel(self, workdir):
        """Test that blur without a kernel is a usage error."""

        truth, _, _ = paths(workdir)
        assert main(['blur', '--in', truth, '--out', str(workdir / 'x.pgm')]) == EXIT_USAGE

class TestDeconv:
    """Test the deconv command."""

    def test_zero_iterations(self, workdir):
        """Test that 0 iterations write the quantized h * rho_0 and a header-only trace."""

        _, observed, kernel = paths(workdir)
        out = str(workdir / 'out.pgm')
        trace = workdir / 'trace.csv'

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--iters', '0',
            '--out', out, '--trace', str(trace)
        ]) == EXIT_OK

        h, maxval = load_image(observed, return_maxval=True)
        k = load_kernel(kernel)

        expected = quantize(h * initial_weight(h, k), maxval) / maxval

        assert np.array_equal(load_image(out), expected)
        assert trace.read_text() == 'n,alpha,rel_err,ftr,residual_rms,wall_ms\n'

    def test_traces(self, workdir):
        """Test that a run with ground truth writes one trace row per iteration."""

        truth, observed, kernel = paths(workdir)
        trace = str(workdir / 'trace.csv')

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--truth', truth,
            '--algo', 'rl', '--iters', '5', '--out', str(workdir / 'out.pgm'), '--trace', trace
        ]) == EXIT_OK

        traces = read_trace(trace)

        assert [t.n for t in traces] == [1, 2, 3, 4, 5]
        assert all(np.isfinite(t.rel_err) for t in traces)

    def test_spectrum(self, workdir):
        """Test that --spectrum writes an image of the input size."""

        truth, observed, kernel = paths(workdir)
        spectrum = str(workdir / 'spectrum.png')

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--truth', truth, '--algo', 'rl',
            '--iters', '2', '--out', str(workdir / 'out.pgm'), '--spectrum', spectrum
        ]) == EXIT_OK

        assert load_image(spectrum).shape == (32, 32)

    def test_spectrum_requires_truth(self, workdir):
        """Test that --spectrum without --truth is a usage error."""

        _, observed, kernel = paths(workdir)

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--iters', '1',
            '--out', str(workdir / 'out.pgm'), '--spectrum', str(workdir / 's.pgm')
        ]) == EXIT_USAGE

    def test_divergence(self, workdir):
        """Test that a diverging run exits with 2 and writes the traces recorded so far."""

        _, observed, kernel = paths(workdir)
        trace = str(workdir / 'trace.csv')

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--algo', 'cauchy20', '--alpha', '1e100',
            '--iters', '10', '--out', str(workdir / 'out.pgm'), '--trace', trace
        ]) == EXIT_DIVERGENCE

        assert os.path.exists(trace)
        assert not os.path.exists(workdir / 'out.pgm')

    def test_default_iteration_blow_up(self, tmp_path):
        """Test that the default mixed-index iteration exits with 2 once its estimate blows up.

        The partial trace holds only finite rows.

        """

        truth = str(tmp_path / 'truth.pgm')
        observed = str(tmp_path / 'observed.pgm')
        kernel = str(tmp_path / 'psf.txt')
        trace = str(tmp_path / 'trace.csv')

        assert main(['synth', '--size', '64', '--seed', '42', '--out', truth]) == EXIT_OK
        assert main([
            'blur', '--in', truth, '--sigma', '2', '--radius', '6',
            '--save-kernel', kernel, '--out', observed
        ]) == EXIT_OK

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--truth', truth,
            '--iters', '64', '--out', str(tmp_path / 'out.pgm'), '--trace', trace
        ]) == EXIT_DIVERGENCE

        traces = read_trace(trace)

        assert len(traces) < 64
        assert [t.n for t in traces] == list(range(1, len(traces) + 1))
        assert all(np.isfinite(t.rel_err) and t.rel_err >= 0 for t in traces)
        assert all(np.isfinite(t.ftr) and np.isfinite(t.residual_rms) for t in traces)
        assert not os.path.exists(tmp_path / 'out.pgm')

    def test_missing_input(self, workdir):
        """Test that a missing input image exits with 66."""

        _, _, kernel = paths(workdir)

        assert main([
            'deconv', '--in', str(workdir / 'missing.pgm'), '--kernel', kernel,
            '--out', str(workdir / 'out.pgm')
        ]) == EXIT_INPUT

    def test_malformed_kernel(self, workdir):
        """Test that a malformed kernel file exits with 66."""

        _, observed, _ = paths(workdir)
        bad = workdir / 'bad.txt'
        bad.write_text('2 2\n1 1\n1 1\n')

        assert main(['deconv', '--in', observed, '--kernel', str(bad), '--out', str(workdir / 'o.pgm')]) == EXIT_INPUT

    def test_unwritable_output(self, workdir):
        """Test that an output in a missing directory exits with 73."""

        _, observed, kernel = paths(workdir)

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--iters', '1', '--algo', 'rl',
            '--out', str(workdir / 'missing' / 'out.pgm')
        ]) == EXIT_OUTPUT

    @pytest.mark.parametrize('argv', [
        ['deconv', '--unknown-flag'],
        ['deconv', '--algo', 'wiener'],
        ['deconv', '--alpha', '0.5', '--alpha-grid', '0.1,0.2'],
        ['deconv', '--alpha-grid', 'a,b'],
        [],
    ])
    def test_usage_errors(self, argv):
        """Test that invalid arguments exit with 64."""

        assert main(argv) == EXIT_USAGE

    def test_invalid_values(self, workdir):
        """Test that invalid parameter values exit with 64."""

        _, observed, kernel = paths(workdir)

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--iters', '-1', '--out', str(workdir / 'o.pgm')
        ]) == EXIT_USAGE

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--eps', '0', '--out', str(workdir / 'o.pgm')
        ]) == EXIT_USAGE

    def test_bad_config(self, workdir):
        """Test that an invalid configuration file exits with 64."""

        _, observed, kernel = paths(workdir)
        cfg = workdir / 'run.json'
        cfg.write_text(json.dumps({'iterations': 'many'}))

        assert main([
            'deconv', '--config', str(cfg), '--in', observed, '--kernel', kernel,
            '--out', str(workdir / 'o.pgm')
        ]) == EXIT_USAGE

    def test_config_overridden_by_flags(self, workdir):
        """Test that flags take precedence over the configuration file."""

        _, observed, kernel = paths(workdir)
        trace = str(workdir / 'trace.csv')

        cfg = workdir / 'run.json'
        cfg.write_text(json.dumps({
            'algorithm': 'rl',
            'iterations': 9,
            'observed': observed,
            'kernel': kernel,
            'output_image': str(workdir / 'from-config.pgm')
        }))

        assert main(['deconv', '--config', str(cfg), '--iters', '3', '--trace', trace]) == EXIT_OK

        assert len(read_trace(trace)) == 3
        assert os.path.exists(workdir / 'from-config.pgm')

    def test_alpha_grid(self, workdir):
        """Test that an alpha grid selects one of its candidates."""

        _, observed, kernel = paths(workdir)
        trace = str(workdir / 'trace.csv')

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--iters', '4', '--collapse-indices',
            '--alpha-grid', '0.05,0.1', '--probe', '2', '--out', str(workdir / 'o.pgm'), '--trace', trace
        ]) == EXIT_OK

        assert {t.alpha_n for t in read_trace(trace)} <= {0.05, 0.1}

    def test_p_grid(self, workdir):
        """Test that a p grid with an alpha grid runs to completion."""

        _, observed, kernel = paths(workdir)

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--iters', '2', '--collapse-indices',
            '--alpha-grid', '0,0.1', '--probe', '2', '--p-grid', '0.5,1,2', '--out', str(workdir / 'o.pgm')
        ]) == EXIT_OK

    def test_p_grid_requires_alpha_grid(self, workdir):
        """Test that a p grid without an alpha grid is a usage error."""

        _, observed, kernel = paths(workdir)

        assert main([
            'deconv', '--in', observed, '--kernel', kernel, '--iters', '2',
            '--p-grid', '0.5,1', '--out', str(workdir / 'o.pgm')
        ]) == EXIT_USAGE

class TestCompare:
    """Test the compare command."""

    def test_outputs(self, workdir, capsys):
        """Test that compare writes traces, images and spectra of both runs and prints the verdict."""

        truth, observed, kernel = paths(workdir)
        out_dir = workdir / 'results'

        assert main([
            'compare', '--in', observed, '--kernel', kernel, '--truth', truth,
            '--iters', '4', '--alpha', '0.1', '--collapse-indices', '--out-dir', str(out_dir)
        ]) == EXIT_OK

        assert sorted(os.listdir(out_dir)) == sorted([
            'rl_trace.csv', 'cauchy31_trace.csv',
            'rl.pgm', 'cauchy31.pgm',
            'rl_ftr.pgm', 'cauchy31_ftr.pgm'
        ])

        assert len(read_trace(str(out_dir / 'rl_trace.csv'))) == 4
        assert all(t.alpha_n == 0.1 for t in read_trace(str(out_dir / 'cauchy31_trace.csv')))

        verdict = capsys.readouterr().out.strip()
        assert verdict in ('cauchy31_rel_err <= rl_rel_err: true', 'cauchy31_rel_err <= rl_rel_err: false')

    def test_png_format(self, workdir):
        """Test that --format png writes PNG images."""

        truth, observed, kernel = paths(workdir)
        out_dir = workdir / 'png'

        assert main([
            'compare', '--in', observed, '--kernel', kernel, '--truth', truth, '--iters', '2',
            '--collapse-indices', '--format', 'png', '--out-dir', str(out_dir)
        ]) == EXIT_OK

        assert os.path.exists(out_dir / 'cauchy31.png')

    def test_requires_truth(self, workdir):
        """Test that compare without ground truth is a usage error."""

        _, observed, kernel = paths(workdir)

        assert main([
            'compare', '--in', observed, '--kernel', kernel, '--out-dir', str(workdir / 'r')
        ]) == EXIT_USAGE

class TestSpectrumCommand:
    """Test the spectrum command."""

    def test_identical(self, workdir):
        """Test that an image compared with itself gives a black spectrum."""

        truth, _, _ = paths(workdir)
        out = str(workdir / 'spectrum.pgm')

        assert main(['spectrum', '--truth', truth, '--in', truth, '--out', out]) == EXIT_OK
        assert not np.any(load_image(out))

def test_help_lists_commands(capsys):
    """Test that the top-level help names every command."""

    help_text = make_parser().format_help()

    for command in ('synth', 'blur', 'deconv', 'compare', 'spectrum'):
        assert command in help_text
