"""
Linear image formation models y = Ax + n and degradation synthesis.

Models act on the last axis of their input: a single row-major vector of height * width samples, or a
(channels, height * width) array processed channel by channel.
"""
import numpy as np
from scipy.interpolate import griddata
from scipy.signal import convolve2d

IDENTITY = 'identity'
MASK = 'mask'
BLUR = 'blur'


def _as_rows(x, length):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != length:
        raise ValueError("Expected %d samples on the last axis, got %d" % (length, x.shape[-1]))
    return x.reshape(-1, length), x.shape[:-1]


class NoiseSpec(object):
    """
    Additive white Gaussian noise; sigma is on the 8-bit intensity scale
    """

    def __init__(self, sigma=0.0, seed=0):
        if not np.isfinite(sigma) or sigma < 0:
            raise ValueError("Noise level must be >= 0, got %s" % sigma)
        self.sigma = float(sigma)
        self.seed = int(seed)


class FormationModel(object):
    variant = None

    def __init__(self, shape):
        height, width = shape
        if height < 1 or width < 1:
            raise ValueError("Invalid model shape: %s" % str(shape))
        self.shape = (int(height), int(width))

    @property
    def size(self):
        return self.shape[0] * self.shape[1]

    @property
    def observed_size(self):
        return self.size

    def apply(self, x):
        raise NotImplementedError

    def adjoint(self, y):
        raise NotImplementedError

    def gram_apply(self, x):
        return self.adjoint(self.apply(x))

    def observe(self, data):
        """
        Observation vector of this model given degraded samples laid out on the pixel grid
        """
        return np.asarray(data, dtype=float)

    def initial_estimate(self, y):
        return self.adjoint(y)

    def crop(self, row, col, height, width):
        raise NotImplementedError


class Identity(FormationModel):
    variant = IDENTITY

    def apply(self, x):
        rows, lead = _as_rows(x, self.size)
        return rows.reshape(lead + (self.size,)).copy()

    def adjoint(self, y):
        return self.apply(y)

    def gram_apply(self, x):
        return self.apply(x)

    def crop(self, row, col, height, width):
        return Identity((height, width))


class Mask(FormationModel):
    """
    Sampling model: y holds the kept samples only, adjoint zero-fills the rest
    """
    variant = MASK

    def __init__(self, keep, shape=None):
        keep = np.asarray(keep).astype(bool)
        if shape is None:
            shape = keep.shape if keep.ndim == 2 else (1, keep.size)
        super(Mask, self).__init__(shape)
        if keep.size != self.size:
            raise ValueError("Mask of %d entries does not match %d pixels" % (keep.size, self.size))
        self.keep = keep.ravel()

    @property
    def observed_size(self):
        return int(np.count_nonzero(self.keep))

    def apply(self, x):
        rows, lead = _as_rows(x, self.size)
        return rows[:, self.keep].reshape(lead + (self.observed_size,))

    def adjoint(self, y):
        rows, lead = _as_rows(y, self.observed_size)
        out = np.zeros((rows.shape[0], self.size))
        out[:, self.keep] = rows
        return out.reshape(lead + (self.size,))

    def gram_apply(self, x):
        rows, lead = _as_rows(x, self.size)
        return (rows * self.keep).reshape(lead + (self.size,))

    def observe(self, data):
        data = np.asarray(data, dtype=float)
        return data[..., self.keep]

    def initial_estimate(self, y):
        """
        Zero-filled observation completed by linear interpolation of the kept samples,
        nearest kept sample outside their convex hull
        """
        rows, lead = _as_rows(y, self.observed_size)
        if self.observed_size == 0:
            return np.zeros(lead + (self.size,))

        grid_r, grid_c = np.mgrid[0:self.shape[0], 0:self.shape[1]]
        points = np.stack([grid_r.ravel(), grid_c.ravel()], axis=1).astype(float)
        known = points[self.keep]

        out = np.zeros((rows.shape[0], self.size))
        for idx, values in enumerate(rows):
            filled = np.full(self.size, np.nan)
            if self.observed_size >= 4:
                try:
                    filled = griddata(known, values, points, method='linear')
                except RuntimeError:
                    # degenerate (e.g. collinear) samples
                    pass
            missing = np.isnan(filled)
            if np.any(missing):
                filled[missing] = griddata(known, values, points[missing], method='nearest')
            filled[self.keep] = values
            out[idx] = filled
        return out.reshape(lead + (self.size,))

    def crop(self, row, col, height, width):
        grid = self.keep.reshape(self.shape)
        return Mask(grid[row:row + height, col:col + width])


class Blur(FormationModel):
    """
    Convolution with a 2-D stencil over a symmetrically padded grid, output the size of the input
    """
    variant = BLUR

    def __init__(self, kernel, shape):
        super(Blur, self).__init__(shape)
        kernel = np.asarray(kernel, dtype=float)
        if kernel.ndim != 2:
            raise ValueError("Blur kernel must be 2-D, got shape %s" % str(kernel.shape))
        if kernel.shape[0] > self.shape[0] or kernel.shape[1] > self.shape[1]:
            raise ValueError("Kernel %s is larger than the %dx%d grid" % (str(kernel.shape), self.shape[0],
                                                                         self.shape[1]))
        self.kernel = kernel
        self.pad = (self._pad_widths(kernel.shape[0]), self._pad_widths(kernel.shape[1]))
        self._row_map = np.pad(np.arange(self.shape[0]), self.pad[0], mode='symmetric')
        self._col_map = np.pad(np.arange(self.shape[1]), self.pad[1], mode='symmetric')

    @staticmethod
    def _pad_widths(length):
        center = (length - 1) // 2
        return length - 1 - center, center

    @property
    def radius(self):
        return max(self.kernel.shape) // 2

    def apply(self, x):
        rows, lead = _as_rows(x, self.size)
        out = np.empty_like(rows)
        for idx, row in enumerate(rows):
            padded = np.pad(row.reshape(self.shape), self.pad, mode='symmetric')
            out[idx] = convolve2d(padded, self.kernel, mode='valid').ravel()
        return out.reshape(lead + (self.size,))

    def adjoint(self, y):
        rows, lead = _as_rows(y, self.size)
        flipped = self.kernel[::-1, ::-1]
        out = np.zeros_like(rows)
        for idx, row in enumerate(rows):
            spread = convolve2d(row.reshape(self.shape), flipped, mode='full')
            folded = np.zeros(self.shape)
            # fold the padding back onto the pixels it was reflected from
            np.add.at(folded, (self._row_map[:, None], self._col_map[None, :]), spread)
            out[idx] = folded.ravel()
        return out.reshape(lead + (self.size,))

    def initial_estimate(self, y):
        rows, lead = _as_rows(y, self.size)
        return rows.reshape(lead + (self.size,)).copy()

    def crop(self, row, col, height, width):
        return Blur(self.kernel, (height, width))


def make_mask(n2, keep_fraction, seed=0):
    """
    Random sampling mask with exactly floor(keep_fraction * n2 + 0.5) kept entries
    :param n2: number of pixels
    :param keep_fraction: fraction of kept pixels in (0, 1]
    :param seed: generator seed
    :return: boolean vector
    """
    if not 0 < keep_fraction <= 1:
        raise ValueError("Keep fraction must be in (0, 1], got %s" % keep_fraction)
    count = int(np.floor(keep_fraction * n2 + 0.5))
    rng = np.random.default_rng(seed)
    mask = np.zeros(n2, dtype=bool)
    mask[rng.permutation(n2)[:count]] = True
    return mask


def add_awgn(x, spec, peak=1.0):
    """
    Adds seeded white Gaussian noise of standard deviation spec.sigma * peak / 255
    :param x: clean samples
    :param spec: NoiseSpec
    :param peak: intensity of white in x (1 for normalized data, 255 for raw 8-bit values)
    :return: noisy copy of x
    """
    x = np.asarray(x, dtype=float)
    if spec.sigma == 0:
        return x.copy()
    rng = np.random.default_rng(spec.seed)
    return x + rng.normal(0.0, spec.sigma * peak / 255.0, size=x.shape)


def make_gaussian_kernel(size, std):
    """
    Normalized isotropic Gaussian stencil of odd size
    """
    if size < 1 or size % 2 == 0:
        raise ValueError("Kernel size must be odd and >= 1, got %d" % size)
    if size == 1:
        return np.ones((1, 1))
    if std <= 0:
        raise ValueError("Kernel std must be > 0, got %s" % std)
    offsets = np.arange(size) - size // 2
    profile = np.exp(-offsets ** 2 / (2.0 * std ** 2))
    kernel = np.outer(profile, profile)
    return kernel / kernel.sum()


def model_for(task, shape, keep=None, kernel=None):
    """
    Formation model matching a restoration task
    """
    if task == 'denoise':
        return Identity(shape)
    if task == 'interpolate':
        if keep is None:
            raise ValueError("Interpolation needs a sampling mask")
        return Mask(np.asarray(keep).reshape(shape))
    if task == 'deblur':
        if kernel is None:
            raise ValueError("Deblurring needs a blur kernel")
        return Blur(kernel, shape)
    raise ValueError("Unknown task: %s" % task)
