"""Command line interface.

::

    cauchy-deconv synth --size 128 --seed 42 --out truth.pgm
    cauchy-deconv blur --in truth.pgm --sigma 2 --radius 6 --out observed.pgm
    cauchy-deconv deconv --in observed.pgm --kernel psf.txt --algo cauchy31 \\
        --iters 64 --alpha-grid 0.25,0.5,1,2 --out restored.pgm --trace trace.csv
    cauchy-deconv compare --in observed.pgm --kernel psf.txt --truth truth.pgm \\
        --iters 64 --alpha 0.5 --out-dir results

Exit codes: 0 on success, 2 when an iteration diverges, 64 on usage
or configuration errors, 66 when an input file cannot be read and 73
when an output file cannot be written.

"""

import argparse
import logging
import math
import os
import sys
from dataclasses import replace

from .alpha_search import AlphaSearchConfig, search_alpha_p
from .config import RunConfig, load_config
from .driver import ALGORITHMS, AlphaPolicy, run
from .exceptions import (
    ConfigError,
    DeconvError,
    DivergenceError,
    ImageFormatError,
    KernelError,
    TraceFormatError,
)
from .fourier import convolve
from .files import (
    image_format,
    load_image,
    load_kernel,
    save_image,
    save_kernel,
    write_trace,
)
from .kernels import gaussian_kernel
from .metrics import ftr, ftr_spectrum_image, relative_error
from .synth import synth_image

EXIT_OK = 0
EXIT_DIVERGENCE = 2
EXIT_USAGE = 64
EXIT_INPUT = 66
EXIT_OUTPUT = 73

BIT_DEPTHS = {8: 255, 16: 65535}

DEFAULT_PROBE_ITERATIONS = 16

class CommandError(Exception):
    """Failure of a command, carrying the exit code to report."""

    exit_code = EXIT_USAGE

class UsageError(CommandError):
    exit_code = EXIT_USAGE

class InputFileError(CommandError):
    exit_code = EXIT_INPUT

    def __init__(self, path, error):
        super().__init__(f'cannot read {path}: {error}')

class OutputFileError(CommandError):
    exit_code = EXIT_OUTPUT

    def __init__(self, path, error):
        super().__init__(f'cannot write {path}: {error}')


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser exiting with :any:`EXIT_USAGE` on invalid arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')

def _float_list(text):
    try:
        values = tuple(float(v) for v in text.split(',') if v.strip())

    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma separated numbers, got {text!r}') from None

    if not values:
        raise argparse.ArgumentTypeError('expected at least one value')

    return values


## File access

def _read(load, path, **kwargs):
    try:
        return load(path, **kwargs)

    except (OSError, ImageFormatError, KernelError, TraceFormatError) as e:
        raise InputFileError(path, e) from e

def _write(save, value, path, **kwargs):
    try:
        save(value, path, **kwargs)

    except OSError as e:
        raise OutputFileError(path, e) from e

def _check_image_path(path):
    try:
        image_format(path)

    except ImageFormatError as e:
        raise UsageError(str(e)) from None

def _output_maxval(path, input_maxval, bits):
    """Maximum sample value of an output image.

    ``--bits`` wins; otherwise the input's depth is kept, widened to 8
    or 16 bit for PNG.

    """

    if bits is not None:
        return BIT_DEPTHS[bits]

    if image_format(path) == '.png' and input_maxval not in BIT_DEPTHS.values():
        return 255 if input_maxval <= 255 else 65535

    return input_maxval

def _kernel_from_args(args):
    if args.kernel is not None and args.sigma is not None:
        raise UsageError('--kernel and --sigma are mutually exclusive')

    if args.sigma is not None:
        radius = args.radius if args.radius is not None else max(1, math.ceil(3 * args.sigma))

        try:
            return gaussian_kernel(args.sigma, radius)

        except DeconvError as e:
            raise UsageError(str(e)) from None

    if args.kernel is None:
        raise UsageError('a kernel is required: give --kernel or --sigma')

    return _read(load_kernel, args.kernel)


## Configuration

def _policy_from_args(args, current):
    """The alpha policy selected by the flags, or None to keep ``current``."""

    if args.alpha_grid is not None:
        probe = args.probe

        if probe is None:
            probe = current.search.probe_iterations if current.search is not None else DEFAULT_PROBE_ITERATIONS

        search = AlphaSearchConfig(
            candidates=tuple(sorted(set(args.alpha_grid))),
            probe_iterations=probe,
            score_at=args.score_at
        )

        return AlphaPolicy(mode='grid-search', search=search)

    if args.alpha is not None:
        return AlphaPolicy(mode='constant', alpha=args.alpha)

    if current.search is not None and (args.probe is not None or args.score_at is not None):
        search = current.search

        if args.probe is not None:
            search = replace(search, probe_iterations=args.probe)

        if args.score_at is not None:
            search = replace(search, score_at=args.score_at)

        return replace(current, search=search)

    return None

def run_config(args):
    """Build the :any:`RunConfig` of a run command.

    Values from ``--config`` are loaded first; flags override them.

    """

    if args.config is not None:
        try:
            config = load_config(args.config)

        except OSError as e:
            raise InputFileError(args.config, e) from e

    else:
        config = RunConfig()

    config = config.with_overrides(
        algorithm=getattr(args, 'algo', None),
        iterations=args.iters,
        alpha_policy=_policy_from_args(args, config.alpha_policy),
        p=args.p,
        eps=args.eps,
        collapse_indices=True if args.collapse_indices else None,
        timing=True if args.timing else None,
        observed=args.input,
        kernel=args.kernel,
        truth=args.truth,
        output_image=getattr(args, 'out', None),
        output_trace=getattr(args, 'trace', None),
        output_spectrum=getattr(args, 'spectrum', None)
    )

    config.validate()
    return config


## Commands

def cmd_synth(args):
    _check_image_path(args.out)

    try:
        img = synth_image(args.size, args.seed)

    except DeconvError as e:
        raise UsageError(str(e)) from None

    _write(save_image, img, args.out, maxval=BIT_DEPTHS[args.bits], plain=args.plain)
    return EXIT_OK

def cmd_blur(args):
    _check_image_path(args.out)

    img, maxval = _read(load_image, args.input, return_maxval=True)
    k = _kernel_from_args(args)

    blurred = convolve(img, k)

    if args.save_kernel is not None:
        _write(save_kernel, k, args.save_kernel)

    _write(save_image, blurred, args.out, maxval=_output_maxval(args.out, maxval, args.bits), plain=args.plain)
    return EXIT_OK

def _load_inputs(config):
    h, maxval = _read(load_image, config.observed, return_maxval=True)
    k = _read(load_kernel, config.kernel)

    truth = None

    if config.truth is not None:
        truth = _read(load_image, config.truth)

    return h, maxval, k, truth

def _search_p(config, p_grid, h, k):
    if config.alpha_policy.mode != 'grid-search':
        raise UsageError('--p-grid requires an alpha grid')

    alpha, p, score = search_alpha_p(h, k, config.alpha_policy.search, config.algorithm, p_grid, base=config)
    logging.info('Selected alpha=%g, p=%g (residual RMS %g)', alpha, p, score)

    return replace(config, p=p, alpha_policy=AlphaPolicy(mode='constant', alpha=alpha))

def cmd_deconv(args):
    config = run_config(args)

    if config.observed is None or config.kernel is None or config.output_image is None:
        raise UsageError('deconv requires an input image, a kernel and an output image')

    if config.output_spectrum is not None and config.truth is None:
        raise UsageError('--spectrum requires --truth')

    for path in (config.output_image, config.output_spectrum):
        if path is not None:
            _check_image_path(path)

    h, maxval, k, truth = _load_inputs(config)

    if args.p_grid is not None:
        config = _search_p(config, args.p_grid, h, k)

    try:
        result = run(config, h, k, truth)

    except DivergenceError as e:
        if config.output_trace is not None:
            _write(write_trace, e.traces, config.output_trace)

        raise

    out_maxval = _output_maxval(config.output_image, maxval, args.bits)

    _write(save_image, result.image, config.output_image, maxval=out_maxval, plain=args.plain)

    if config.output_trace is not None:
        _write(write_trace, result.traces, config.output_trace)

    if config.output_spectrum is not None:
        _write(
            save_image,
            ftr_spectrum_image(truth, result.image, config.eps),
            config.output_spectrum,
            maxval=_output_maxval(config.output_spectrum, maxval, args.bits),
            plain=args.plain
        )

    if truth is not None:
        logging.info('%s: relative error %g, FTR %g',
                     config.algorithm, relative_error(truth, result.image), ftr(truth, result.image))

    return EXIT_OK

def cmd_compare(args):
    config = run_config(args)

    if config.observed is None or config.kernel is None or config.truth is None:
        raise UsageError('compare requires an input image, a kernel and a ground truth image')

    ext = f'.{args.format}' if args.format is not None else os.path.splitext(config.observed)[1].lower()

    if ext not in ('.pgm', '.png'):
        ext = '.pgm'

    h, maxval, k, truth = _load_inputs(config)
    out_maxval = _output_maxval(f'out{ext}', maxval, args.bits)

    try:
        os.makedirs(args.out_dir, exist_ok=True)

    except OSError as e:
        raise OutputFileError(args.out_dir, e) from e

    errors = {}

    for name, run_cfg in (
        ('rl', replace(config, algorithm='rl', alpha_policy=AlphaPolicy())),
        ('cauchy31', replace(config, algorithm='cauchy31'))
    ):
        result = run(run_cfg, h, k, truth)
        errors[name] = relative_error(truth, result.image)

        logging.info('%s: relative error %g, FTR %g', name, errors[name], ftr(truth, result.image))

        _write(write_trace, result.traces, os.path.join(args.out_dir, f'{name}_trace.csv'))
        _write(save_image, result.image, os.path.join(args.out_dir, f'{name}{ext}'),
               maxval=out_maxval, plain=args.plain)
        _write(save_image, ftr_spectrum_image(truth, result.image, config.eps),
               os.path.join(args.out_dir, f'{name}_ftr{ext}'),
               maxval=out_maxval, plain=args.plain)

    verdict = 'true' if errors['cauchy31'] <= errors['rl'] else 'false'
    print(f'cauchy31_rel_err <= rl_rel_err: {verdict}')

    return EXIT_OK

def cmd_spectrum(args):
    _check_image_path(args.out)

    truth, maxval = _read(load_image, args.truth, return_maxval=True)
    img = _read(load_image, args.input)

    spectrum = ftr_spectrum_image(truth, img, args.eps)
    _write(save_image, spectrum, args.out, maxval=_output_maxval(args.out, maxval, args.bits), plain=args.plain)

    return EXIT_OK


## Parser

def make_parser():
    """Create the argument parser of the ``cauchy-deconv`` command."""

    common = ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='log progress; repeat for per-iteration output')

    output = ArgumentParser(add_help=False)
    output.add_argument('--bits', type=int, choices=sorted(BIT_DEPTHS),
                        help='output bit depth (default: that of the input image)')
    output.add_argument('--plain', action='store_true', help='write plain (P2) PGM files')

    runs = ArgumentParser(add_help=False)
    runs.add_argument('--in', dest='input', help='observed (blurred) image')
    runs.add_argument('--kernel', help='kernel grid file')
    runs.add_argument('--truth', help='ground truth image')
    runs.add_argument('--config', help='JSON run configuration; flags override its values')
    runs.add_argument('--iters', type=int, help='number of iterations')
    runs.add_argument('--p', type=float, help='exponent of the Laplacian norm')
    runs.add_argument('--eps', type=float, help='division guard')
    runs.add_argument('--collapse-indices', action='store_true',
                      help='use the current weight in place of the previous one')
    runs.add_argument('--timing', action='store_true', help='record wall time per iteration')

    alpha = runs.add_mutually_exclusive_group()
    alpha.add_argument('--alpha', type=float, help='constant regularization length')
    alpha.add_argument('--alpha-grid', type=_float_list, help='comma separated alpha candidates')

    runs.add_argument('--probe', type=int, help='iterations per alpha candidate')
    runs.add_argument('--score-at', type=int, help='iteration at which candidates are scored')

    parser = ArgumentParser(
        prog='cauchy-deconv',
        description='Iterative deconvolution of smooth images with known blur kernels.'
    )

    commands = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')

    synth = commands.add_parser('synth', parents=[common, output], help='create a smooth test image')
    synth.add_argument('--size', type=int, default=128)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--out', required=True)
    synth.set_defaults(run=cmd_synth, bits=16)

    blur = commands.add_parser('blur', parents=[common, output], help='convolve an image with a kernel')
    blur.add_argument('--in', dest='input', required=True)
    blur.add_argument('--kernel')
    blur.add_argument('--sigma', type=float, help='build a Gaussian kernel with this standard deviation')
    blur.add_argument('--radius', type=int, help='radius of the Gaussian kernel (default: ceil(3 sigma))')
    blur.add_argument('--save-kernel', help='also write the kernel grid used')
    blur.add_argument('--out', required=True)
    blur.set_defaults(run=cmd_blur)

    deconv = commands.add_parser('deconv', parents=[common, output, runs], help='deconvolve an image')
    deconv.add_argument('--algo', choices=sorted(ALGORITHMS))
    deconv.add_argument('--p-grid', type=_float_list, help='comma separated values of p searched with the alpha grid')
    deconv.add_argument('--out')
    deconv.add_argument('--trace', help='CSV file receiving the iteration traces')
    deconv.add_argument('--spectrum', help='FTR spectrum image (requires --truth)')
    deconv.set_defaults(run=cmd_deconv)

    compare = commands.add_parser('compare', parents=[common, output, runs],
                                  help='compare Richardson-Lucy with the noise suppressed iteration')
    compare.add_argument('--out-dir', required=True)
    compare.add_argument('--format', choices=('pgm', 'png'), help='image format (default: that of the input)')
    compare.set_defaults(run=cmd_compare)

    spectrum = commands.add_parser('spectrum', parents=[common, output], help='export the FTR spectrum image')
    spectrum.add_argument('--truth', required=True)
    spectrum.add_argument('--in', dest='input', required=True)
    spectrum.add_argument('--out', required=True)
    spectrum.add_argument('--eps', type=float, default=1e-12)
    spectrum.set_defaults(run=cmd_spectrum)

    return parser

def _configure_logging(verbose):
    level = logging.WARNING

    if verbose == 1:
        level = logging.INFO

    elif verbose > 1:
        level = logging.DEBUG

    logging.basicConfig(level=level, format='%(levelname)s: %(message)s')

def main(argv=None):
    """Run the command line interface.

    :param argv: Arguments, excluding the program name. ``sys.argv``
                 is used if None.

    :returns: The exit code.

    """

    parser = make_parser()

    try:
        args = parser.parse_args(argv)

    except SystemExit as e:
        return e.code

    _configure_logging(args.verbose)

    try:
        return args.run(args)

    except DivergenceError as e:
        logging.error('%s', e)
        return EXIT_DIVERGENCE

    except CommandError as e:
        logging.error('%s', e)
        return e.exit_code

    except ConfigError as e:
        logging.error('invalid configuration: %s', e)
        return EXIT_USAGE

    except DeconvError as e:
        logging.error('%s', e)
        return EXIT_INPUT
