"""
Binary PGM/PPM images, blur kernel stencils and sampling masks on disk
"""
import numpy as np

PNM_MAGIC = {b'P5': 1, b'P6': 3}
MAXVAL = 255


def _read_token(data, pos):
    """
    Next whitespace separated header token, skipping '#' comments
    :return: (token, position after the token)
    """
    length = len(data)
    while pos < length:
        if data[pos:pos + 1].isspace():
            pos += 1
        elif data[pos:pos + 1] == b'#':
            while pos < length and data[pos:pos + 1] not in [b'\n', b'\r']:
                pos += 1
        else:
            break
    start = pos
    while pos < length and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b'#':
        pos += 1
    if start == pos:
        raise ValueError("Truncated PNM header")
    return data[start:pos], pos


def decode_pnm(data):
    """
    :param data: bytes of a P5 or P6 file
    :return: (channels, height, width) float array on [0, 1]
    """
    magic, pos = _read_token(data, 0)
    if magic not in PNM_MAGIC:
        raise ValueError("Not a binary PGM/PPM image (magic %r)" % magic)
    channels = PNM_MAGIC[magic]

    header = []
    for _ in range(3):
        token, pos = _read_token(data, pos)
        if not token.isdigit():
            raise ValueError("Invalid PNM header value %r" % token)
        header.append(int(token))
    width, height, maxval = header
    if maxval < 1 or maxval > MAXVAL:
        raise ValueError("Only 8-bit images are supported, got maxval %d" % maxval)

    # a single whitespace byte separates the header from the raster
    pos += 1
    count = width * height * channels
    if len(data) - pos < count:
        raise ValueError("PNM raster is truncated: expected %d bytes, got %d" % (count, max(len(data) - pos, 0)))

    raster = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos)
    pixels = raster.reshape(height, width, channels).transpose(2, 0, 1)
    return pixels.astype(float) / maxval


def encode_pnm(pixels):
    """
    :param pixels: (channels, height, width) array on [0, 1], 1 or 3 channels
    :return: bytes of a P5 or P6 file
    """
    pixels = np.asarray(pixels, dtype=float)
    if pixels.ndim == 2:
        pixels = pixels[None]
    channels, height, width = pixels.shape
    if channels not in [1, 3]:
        raise ValueError("PNM images have 1 or 3 channels, got %d" % channels)

    magic = b'P5' if channels == 1 else b'P6'
    raster = np.round(np.clip(pixels, 0.0, 1.0) * MAXVAL).astype(np.uint8).transpose(1, 2, 0)
    return b"%s\n%d %d\n%d\n" % (magic, width, height, MAXVAL) + raster.tobytes()


def read_pnm(path):
    with open(path, 'rb') as fp:
        data = fp.read()
    try:
        return decode_pnm(data)
    except ValueError as e:
        raise IOError("File: %s: %s" % (path, e))


def write_pnm(path, pixels):
    with open(path, 'wb') as fp:
        fp.write(encode_pnm(pixels))
    return True


def read_kernel(path):
    """
    Kernel stencil file: first line "rows cols", then rows * cols reals in row-major order
    """
    with open(path) as fp:
        tokens = fp.read().split()
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = np.array([float(item) for item in tokens[2:]])
    except (IndexError, ValueError):
        raise IOError("File: %s is not a kernel stencil" % path)
    if rows < 1 or cols < 1 or values.shape[0] != rows * cols:
        raise IOError("File: %s declares a %dx%d kernel but holds %d values" % (path, rows, cols, values.shape[0]))
    return values.reshape(rows, cols)


def write_kernel(path, kernel):
    kernel = np.asarray(kernel, dtype=float)
    with open(path, 'w') as fp:
        fp.write("%d %d\n" % kernel.shape)
        for row in kernel:
            fp.write(" ".join("%.17g" % value for value in row) + "\n")
    return True


def read_mask(path):
    """
    Sampling mask stored as a PGM, non zero pixels are kept
    :return: (height, width) boolean array
    """
    pixels = read_pnm(path)
    if pixels.shape[0] != 1:
        raise IOError("File: %s: masks must be single channel" % path)
    return pixels[0] > 0


def write_mask(path, mask):
    return write_pnm(path, np.asarray(mask, dtype=float)[None])
