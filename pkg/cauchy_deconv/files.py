"""Reading and writing images, kernels and traces.

Images are exchanged as grayscale PGM (``P2`` plain or ``P5`` binary,
8 or 16 bit) or PNG files. On load, samples are divided by the maximum
sample value so that images hold reals in ``[0, 1]``; on save they are
clamped to ``[0, 1]``, scaled and rounded half to even. Quantization
happens only here.

Kernels are plain text grids: a first line ``W H`` followed by ``H``
rows of ``W`` reals.

Traces are CSV files with one row per iteration.

"""

import csv
import logging
import os
import re

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError

from .exceptions import ImageFormatError, KernelError, TraceFormatError
from .grid import Kernel, as_field
from .metrics import IterationTrace

PNG_MAGIC = b'\x89PNG\r\n\x1a\n'

TRACE_HEADER = ('n', 'alpha', 'rel_err', 'ftr', 'residual_rms', 'wall_ms')

KERNEL_SUM_WARNING = 1e-6

_COMMENT = re.compile(rb'#[^\n]*')


## Images

def _pgm_header(data):
    """Split the four header tokens of a PGM file.

    :returns: The tokens and the offset of the whitespace byte that
              terminates the last one.

    """

    tokens = []
    pos = 0

    while len(tokens) < 4:
        if pos >= len(data):
            raise ImageFormatError('truncated PGM header')

        c = data[pos:pos + 1]

        if c == b'#':
            end = data.find(b'\n', pos)
            pos = len(data) if end < 0 else end + 1

        elif c.isspace():
            pos += 1

        else:
            start = pos

            while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b'#':
                pos += 1

            tokens.append(data[start:pos])

    return tokens, pos

def _header_int(token, what):
    try:
        return int(token)

    except ValueError:
        raise ImageFormatError(f'malformed PGM header: invalid {what} {token!r}') from None

def _decode_pgm(data):
    tokens, pos = _pgm_header(data)
    magic = tokens[0]

    if magic not in (b'P2', b'P5'):
        raise ImageFormatError(f'malformed PGM header: unknown magic {magic!r}')

    width = _header_int(tokens[1], 'width')
    height = _header_int(tokens[2], 'height')
    maxval = _header_int(tokens[3], 'maximum value')

    if width < 1 or height < 1:
        raise ImageFormatError(f'malformed PGM header: size {width}x{height}')

    if not 1 <= maxval <= 65535:
        raise ImageFormatError(f'unsupported bit depth: maximum value {maxval}')

    count = width * height

    if magic == b'P5':
        dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')
        start = pos + 1
        raw = data[start:start + count * dtype.itemsize]

        if len(raw) != count * dtype.itemsize:
            raise ImageFormatError('truncated PGM raster')

        samples = np.frombuffer(raw, dtype=dtype)

    else:
        words = _COMMENT.sub(b'', data[pos:]).split()

        if len(words) != count:
            raise ImageFormatError(f'PGM raster has {len(words)} samples, expected {count}')

        try:
            samples = np.array([int(w) for w in words], dtype=np.int64)

        except ValueError:
            raise ImageFormatError('malformed PGM raster: non-integer sample') from None

    if np.any(samples > maxval) or np.any(samples < 0):
        raise ImageFormatError(f'PGM sample exceeds maximum value {maxval}')

    return samples.reshape(height, width), maxval

def _decode_png(path):
    try:
        with PILImage.open(path) as img:
            mode = img.mode

            if mode == '1':
                img = img.convert('L')
                mode = 'L'

            if mode == 'L':
                return np.asarray(img), 255

            if mode in ('I', 'I;16', 'I;16B', 'I;16L'):
                samples = np.asarray(img)

                if np.any(samples > 65535) or np.any(samples < 0):
                    raise ImageFormatError('unsupported bit depth')

                return samples, 65535

            raise ImageFormatError(f'grayscale required, got mode {mode}')

    except UnidentifiedImageError as e:
        raise ImageFormatError(f'{path}: {e}') from None

def load_image(path, return_maxval=False):
    """Load a grayscale PGM or PNG image as reals in ``[0, 1]``.

    The format is detected from the file contents.

    :param path: Path to the file.
    :param return_maxval: Also return the maximum sample value of the
                          file (255 or 65535 for PNG).

    :returns: The image, or ``(image, maxval)`` if ``return_maxval``.

    :raises OSError: If the file cannot be read.
    :raises ImageFormatError: If the file is malformed, has an
                              unsupported bit depth or is not grayscale.

    """

    with open(path, 'rb') as f:
        data = f.read()

    if data.startswith(PNG_MAGIC):
        samples, maxval = _decode_png(path)

    elif data[:2] in (b'P2', b'P5'):
        samples, maxval = _decode_pgm(data)

    else:
        raise ImageFormatError(f'{path}: not a PGM or PNG file')

    img = np.asarray(samples, dtype=np.float64) / maxval
    logging.debug('Loaded %s: %dx%d, maxval %d', path, img.shape[1], img.shape[0], maxval)

    return (img, maxval) if return_maxval else img

def quantize(img, maxval):
    """Clamp ``img`` to ``[0, 1]`` and scale to integer samples in ``[0, maxval]``.

    Rounding is half to even.

    """

    img = as_field(img, 'image')
    return np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(np.int64)

def image_format(path):
    """Return the lower-case extension of ``path``, which must be ``.pgm`` or ``.png``.

    :raises ImageFormatError: For any other extension.

    """

    ext = os.path.splitext(path)[1].lower()

    if ext not in ('.pgm', '.png'):
        raise ImageFormatError(f'{path}: unsupported image extension {ext!r}')

    return ext

def save_image(img, path, maxval=255, plain=False):
    """Save ``img`` as a grayscale image, chosen by the extension of ``path``.

    :param img: Image with values in ``[0, 1]``; values outside are clamped.
    :param path: Output path ending in ``.pgm`` or ``.png``.
    :param maxval: Maximum sample value. PNG supports 255 and 65535,
                   PGM any value up to 65535.
    :param plain: Write a plain (``P2``) PGM instead of ``P5``.

    :raises ImageFormatError: If the extension or ``maxval`` is unsupported.
    :raises OSError: If the file cannot be written.

    """

    ext = image_format(path)

    if not 1 <= maxval <= 65535:
        raise ImageFormatError(f'unsupported bit depth: maximum value {maxval}')

    samples = quantize(img, maxval)
    height, width = samples.shape

    if ext == '.png':
        if maxval == 255:
            pil_img = PILImage.fromarray(samples.astype(np.uint8))

        elif maxval == 65535:
            pil_img = PILImage.fromarray(samples.astype(np.uint16))

        else:
            raise ImageFormatError(f'PNG requires a maximum value of 255 or 65535, got {maxval}')

        pil_img.save(path, format='PNG')

    elif plain:
        with open(path, 'w', encoding='ascii', newline='\n') as f:
            f.write(f'P2\n{width} {height}\n{maxval}\n')

            for row in samples:
                f.write(' '.join(str(v) for v in row))
                f.write('\n')

    else:
        dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')

        with open(path, 'wb') as f:
            f.write(f'P5\n{width} {height}\n{maxval}\n'.encode('ascii'))
            f.write(samples.astype(dtype).tobytes())

    logging.debug('Saved %s: %dx%d, maxval %d', path, width, height, maxval)


## Kernels

def load_kernel(path):
    """Load a kernel from a plain text grid and normalize it to unit sum.

    A warning is logged when the sum of the entries in the file
    deviates from one by more than ``1e-6``.

    :raises OSError: If the file cannot be read.
    :raises KernelError: If the grid is malformed, has even side
                         lengths or contains non-numeric tokens.

    """

    with open(path, encoding='utf-8') as f:
        lines = [line.split() for line in f if line.strip()]

    if not lines or len(lines[0]) != 2:
        raise KernelError(f'{path}: first line must be "W H"')

    try:
        width, height = (int(t) for t in lines[0])

    except ValueError:
        raise KernelError(f'{path}: non-numeric kernel size {lines[0]}') from None

    rows = lines[1:]

    if len(rows) != height or any(len(row) != width for row in rows):
        raise KernelError(f'{path}: expected {height} rows of {width} values')

    try:
        data = np.array([[float(t) for t in row] for row in rows], dtype=np.float64)

    except ValueError:
        raise KernelError(f'{path}: non-numeric kernel entry') from None

    total = data.sum()

    if abs(total - 1.0) > KERNEL_SUM_WARNING:
        logging.warning('Kernel %s sums to %.17g, normalizing', path, total)

    return Kernel(data)

def save_kernel(k, path):
    """Write kernel ``k`` as a plain text grid with 17 significant digits."""

    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(f'{k.side_x} {k.side_y}\n')

        for row in k.data:
            f.write(' '.join(format(v, '.17g') for v in row))
            f.write('\n')


## Traces

def _format_float(x):
    return format(x, '.17g')

def write_trace(traces, path):
    """Write iteration traces as CSV.

    The header is ``n,alpha,rel_err,ftr,residual_rms,wall_ms``. Floats
    are written with 17 significant digits, missing values as ``nan``.
    Lines end in LF.

    """

    with open(path, 'w', encoding='ascii', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TRACE_HEADER)

        for t in traces:
            writer.writerow((
                t.n,
                _format_float(t.alpha_n),
                _format_float(t.rel_err),
                _format_float(t.ftr),
                _format_float(t.residual_rms),
                _format_float(t.wall_ms)
            ))

def read_trace(path):
    """Read traces written by :any:`write_trace`.

    :returns: A list of :any:`IterationTrace`.

    :raises TraceFormatError: If the header or a row is malformed.

    """

    with open(path, encoding='ascii', newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)

        if header is None or tuple(header) != TRACE_HEADER:
            raise TraceFormatError(f'{path}: expected header {",".join(TRACE_HEADER)}')

        traces = []

        for row in reader:
            if len(row) != len(TRACE_HEADER):
                raise TraceFormatError(f'{path}: row {reader.line_num} has {len(row)} columns')

            try:
                n = int(row[0])
                alpha, rel_err, ftr, residual, wall = (float(v) for v in row[1:])

            except ValueError:
                raise TraceFormatError(f'{path}: row {reader.line_num} is not numeric') from None

            traces.append(IterationTrace(
                n=n,
                alpha_n=alpha,
                rel_err=rel_err,
                ftr=ftr,
                residual_rms=residual,
                wall_ms=wall
            ))

    return traces
