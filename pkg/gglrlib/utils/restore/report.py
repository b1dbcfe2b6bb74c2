import io
import logging
import sys

import numpy as np
from scipy.ndimage import uniform_filter
from tabulate import tabulate

PSNR_CAP = 99.0

SSIM_WINDOW = 8
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2

CSV_HEADER = "task,aux,layers,cg_iters,psnr_db,ssim,seconds"


def _pixels(image):
    data = getattr(image, 'data', image)
    return np.asarray(data, dtype=float)


def psnr(a, b):
    """
    Peak signal to noise ratio of two images on the [0, 1] scale
    :return: dB, capped at PSNR_CAP for identical images
    """
    a = _pixels(a)
    b = _pixels(b)
    if a.shape != b.shape:
        raise ValueError("Cannot compare images of shape %s and %s" % (str(a.shape), str(b.shape)))
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(1.0 / mse)))


def ssim(a, b):
    """
    Mean structural similarity over 8x8 uniform windows, averaged over channels
    """
    a = _pixels(a)
    b = _pixels(b)
    if a.shape != b.shape:
        raise ValueError("Cannot compare images of shape %s and %s" % (str(a.shape), str(b.shape)))
    if a.ndim == 2:
        a = a[None]
        b = b[None]

    scores = []
    for plane_a, plane_b in zip(a, b):
        mean_a = uniform_filter(plane_a, size=SSIM_WINDOW)
        mean_b = uniform_filter(plane_b, size=SSIM_WINDOW)
        var_a = uniform_filter(plane_a * plane_a, size=SSIM_WINDOW) - mean_a * mean_a
        var_b = uniform_filter(plane_b * plane_b, size=SSIM_WINDOW) - mean_b * mean_b
        cov = uniform_filter(plane_a * plane_b, size=SSIM_WINDOW) - mean_a * mean_b

        numerator = (2 * mean_a * mean_b + SSIM_C1) * (2 * cov + SSIM_C2)
        denominator = (mean_a * mean_a + mean_b * mean_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
        scores.append(np.mean(numerator / denominator))

    return float(np.mean(scores))


def metrics_line(task, aux, layers, cg_iters, psnr_db, ssim_value, seconds):
    """
    One CSV record matching CSV_HEADER
    """
    return "%s,%d,%d,%d,%.4f,%.6f,%.3f" % (task, aux, layers, cg_iters, psnr_db, ssim_value, seconds)


def append_metrics(csv_file, line):
    """
    Appends a record to a metrics file, writing the header first when the file is new or empty
    """
    try:
        with open(csv_file) as fp:
            has_header = fp.readline() != ""
    except FileNotFoundError:
        has_header = False

    with open(csv_file, "a") as fp:
        if not has_header:
            fp.write(CSV_HEADER + "\n")
        fp.write(line + "\n")
    return True


def pretty_print_suites(results):
    """
    Formats selftest results as a table
    :param results: list of (suite name, passed, seconds, detail)
    """
    table = [[name, "PASS" if passed else "FAIL", "%.3f" % seconds, detail]
             for name, passed, seconds, detail in results]
    return tabulate(table, headers=["suite", "result", "secs", "detail"])


class Logger(object):

    def __init__(self, logger_name, active=True, echo=False, level=logging.DEBUG):

        self.logger_name = logger_name
        self.stream = io.StringIO()
        self.handler = logging.StreamHandler(self.stream)
        self.logger = logging.getLogger(logger_name)
        self.logger.setLevel(level)
        self.active = active

        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)

        self.logger.addHandler(self.handler)

        if echo:
            console = logging.StreamHandler(sys.stderr)
            console.setLevel(logging.INFO)
            self.logger.addHandler(console)

    def log(self, message, level=logging.DEBUG):
        if not self.active:
            return True
        message = "%s: %s" % (self.logger_name, message)
        self.logger.log(level, message)
        return True

    def to_string(self):
        self.handler.flush()

        return self.stream.getvalue()
