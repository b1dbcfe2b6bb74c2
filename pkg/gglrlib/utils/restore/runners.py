"""
Whole image restoration: sliding window patches, per patch solves and overlap averaging
"""
import logging
import os
from timeit import default_timer as timer

import numpy as np
from joblib import Parallel, delayed

from ..prior.gng import Patch, PriorBuilder
from . import report
from .formation import Identity, Mask, Blur
from .solvers import AdmmConfig, PnpRunner

TASK_MODELS = {
    'denoise': Identity,
    'interpolate': Mask,
    'deblur': Blur,
}

PATCH_SIZE = 36
PATCH_STRIDE = 32

# kernels wider than this are deblurred on larger, half overlapping tiles
TILE_RADIUS = 4
TILE_SIZE = 64


class Image(object):
    """
    Channel planar image with intensities on [0, 1]
    """

    def __init__(self, data):
        data = np.asarray(data, dtype=float)
        if data.ndim == 2:
            data = data[None]
        if data.ndim != 3 or data.shape[0] not in [1, 3]:
            raise ValueError("Image data must be (channels, height, width) with 1 or 3 channels, got %s"
                             % str(data.shape))
        self.data = data

    @property
    def channels(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    @property
    def shape(self):
        return self.height, self.width

    def flat(self):
        return self.data.reshape(self.channels, -1)

    def clamp(self):
        return Image(np.clip(self.data, 0.0, 1.0))


class RestoreReport(object):
    def __init__(self, histories, patch_count, seconds, psnr_db=None, ssim=None):
        self.histories = histories
        self.patch_count = patch_count
        self.seconds = seconds
        self.psnr_db = psnr_db
        self.ssim = ssim
        self.max_abs_error = None


def window_origins(length, size, stride):
    if size > length:
        raise ValueError("Patch size %d exceeds image dimension %d" % (size, length))
    if stride < 1 or stride > size:
        raise ValueError("Stride must be in [1, %d], got %d" % (size, stride))
    origins = list(range(0, length - size + 1, stride))
    if origins[-1] != length - size:
        origins.append(length - size)
    return origins


def patchify(img, size=PATCH_SIZE, stride=PATCH_STRIDE):
    """
    Sliding window patches; the last window of each axis is anchored to the image edge
    :return: list of ((row, col), Patch) in row-major origin order
    """
    patches = []
    for row in window_origins(img.height, size, stride):
        for col in window_origins(img.width, size, stride):
            block = img.data[:, row:row + size, col:col + size]
            patches.append(((row, col), Patch.from_grid(block)))
    return patches


def aggregate(patches, width, height):
    """
    Per pixel average of overlapping patches, accumulated in row-major origin order
    """
    if len(patches) == 0:
        raise ValueError("No patches to aggregate")
    channels = patches[0][1].channels
    mean = np.zeros((channels, height, width))
    count = np.zeros((height, width))

    for (row, col), patch in sorted(patches, key=lambda item: item[0]):
        size = patch.side
        if row + size > height or col + size > width:
            raise ValueError("Patch at (%d, %d) falls outside a %dx%d image" % (row, col, height, width))
        window = (slice(row, row + size), slice(col, col + size))
        count[window] += 1
        # running mean keeps equal contributions exact
        mean[(slice(None),) + window] += (patch.to_grid() - mean[(slice(None),) + window]) / count[window]

    if np.any(count == 0):
        raise ValueError("%d pixels are not covered by any patch" % int(np.sum(count == 0)))
    return Image(mean)


def tile_geometry(model, height, width, size=PATCH_SIZE, stride=PATCH_STRIDE):
    """
    Patch size and stride for a job, growing to half overlapping tiles for wide blur kernels
    and shrinking to the image for small inputs
    """
    if isinstance(model, Blur) and model.radius > TILE_RADIUS:
        size = max(size, TILE_SIZE)
        stride = size // 2
    size = min(size, height, width)
    stride = min(stride, size)
    return size, stride


def _solve_patch(model, builder, config, origin, patch, logger):
    row, col = origin
    local = model.crop(row, col, patch.side, patch.side)
    y = local.observe(patch.data)
    x, state = PnpRunner(local, builder, config, logger=logger).run(y)
    return Patch(x, side=patch.side), state.history


def restore(observed, task, model, config=None, builder=None, **kwargs):
    """
    Restores a degraded image patch by patch
    :param observed: Image laid out on the pixel grid (missing pixels of an interpolation job are ignored)
    :param task: denoise, interpolate or deblur
    :param model: FormationModel over the whole image
    :param config: AdmmConfig
    :param builder: PriorBuilder shared by all patches
    :param kwargs: patch_size, stride, n_jobs, reference (Image), logger,
        patch_logger (one Logger shared by every patch solve, an inactive one when None)
    :return: (Image clamped to [0, 1], RestoreReport)
    """
    if task not in TASK_MODELS:
        raise ValueError("Unknown task: %s" % task)
    if not isinstance(model, TASK_MODELS[task]):
        raise ValueError("Task %s needs a %s model, got %s" % (task, TASK_MODELS[task].__name__,
                                                             type(model).__name__))
    if model.shape != observed.shape:
        raise ValueError("Model shape %s does not match image shape %s" % (str(model.shape), str(observed.shape)))

    config = config if config is not None else AdmmConfig()
    builder = builder if builder is not None else PriorBuilder()
    n_jobs = kwargs.get('n_jobs', 1)
    reference = kwargs.get('reference', None)
    logger = kwargs.get('logger', None) or report.Logger("Restore %s" % task)
    patch_logger = kwargs.get('patch_logger', None) or report.Logger("Restore %s patches" % task, active=False)

    size, stride = tile_geometry(model, observed.height, observed.width, kwargs.get('patch_size', PATCH_SIZE),
                                 kwargs.get('stride', PATCH_STRIDE))

    begin = timer()
    logger.log("Starting %s with %s on %dx%d patches, stride %d" % (task, config.family, size, size, stride))
    patches = patchify(observed, size, stride)
    results = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_solve_patch)(model, builder, config, origin, patch, patch_logger) for origin, patch in patches
    )

    restored = aggregate([(origin, result[0]) for (origin, _), result in zip(patches, results)],
                         observed.width, observed.height)
    seconds = timer() - begin
    logger.log("Restored %d patches: %.5f secs" % (len(patches), seconds), logging.INFO)

    output = restored.clamp()
    rep = RestoreReport([result[1] for result in results], len(patches), seconds)
    if reference is not None:
        rep.psnr_db = report.psnr(output, reference)
        rep.ssim = report.ssim(output, reference)
        rep.max_abs_error = float(np.max(np.abs(restored.data - reference.data)))
        logger.log("PSNR %.4f dB, SSIM %.6f" % (rep.psnr_db, rep.ssim), logging.INFO)

    return output, rep


def thread_count(threads=None):
    """
    Worker count from an explicit value, the GGLR_THREADS variable or the machine
    """
    if threads is None:
        threads = os.environ.get('GGLR_THREADS', None)
    if threads is None or threads == '':
        return os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("Thread count must be >= 1, got %d" % threads)
    return threads
