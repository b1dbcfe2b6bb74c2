"""
Hand-crafted per pixel features used by the edge weight kernel.
Each pixel gets (r / N, c / N, luminance, local gradient magnitude), every component scaled by its
weight in FeatureConfig.
"""
import numpy as np

BT601 = np.array([0.299, 0.587, 0.114])

FEATURE_DIM = 4


class FeatureConfig(object):
    def __init__(self, **kwargs):
        self.position_weight = float(kwargs.get('position_weight', 1.0))
        self.luminance_weight = float(kwargs.get('luminance_weight', 1.0))
        self.gradient_weight = float(kwargs.get('gradient_weight', 1.0))
        self.validate()

    def validate(self):
        for name in ['position_weight', 'luminance_weight', 'gradient_weight']:
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError("Feature weight %s must be >= 0, got %s" % (name, value))
        return True

    def weights(self):
        return np.array([self.position_weight, self.position_weight, self.luminance_weight, self.gradient_weight])


class FeatureField(object):
    def __init__(self, side, data):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] != side * side:
            raise ValueError("Feature field of shape %s does not cover a %dx%d patch" % (str(data.shape), side, side))
        if not np.all(np.isfinite(data)):
            raise ValueError("Feature field contains non finite entries")
        self.side = side
        self.data = data

    @property
    def dim(self):
        return self.data.shape[1]

    def __getitem__(self, item):
        return self.data[item]


def luminance(data):
    """
    Luminance of channel planar data
    :param data: (channels, n) array with 1 or 3 channels, or a single (n,) channel
    :return: (n,) array
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        return data
    if data.shape[0] == 1:
        return data[0]
    if data.shape[0] == 3:
        return np.tensordot(BT601, data, axes=1)
    raise ValueError("Luminance is defined for 1 or 3 channels, got %d" % data.shape[0])


def compute_features(patch, cfg=None):
    """
    :param patch: Patch the features are computed from
    :param cfg: FeatureConfig, defaults to unit weights
    :return: FeatureField with FEATURE_DIM components per pixel
    """
    if cfg is None:
        cfg = FeatureConfig()

    side = patch.side
    lum = luminance(patch.data).reshape(side, side)
    rows, cols = np.mgrid[0:side, 0:side]

    if side > 1:
        grad_r, grad_c = np.gradient(lum)
        magnitude = np.hypot(grad_r, grad_c)
    else:
        magnitude = np.zeros_like(lum)

    data = np.stack([
        rows.ravel() / side,
        cols.ravel() / side,
        lum.ravel(),
        magnitude.ravel()
    ], axis=1) * cfg.weights()

    return FeatureField(side, data)
