import numpy as np
import pytest

from gglrlib.utils.prior.features import FeatureConfig, FeatureField, compute_features, luminance, FEATURE_DIM
from gglrlib.utils.prior.gng import Patch


def test_constant_patch_differs_only_in_position():
    field = compute_features(Patch(np.full(16, 0.4)))
    assert field.dim == FEATURE_DIM
    np.testing.assert_array_equal(field.data[:, 2], 0.4)
    np.testing.assert_array_equal(field.data[:, 3], 0)
    positions = field.data[:, :2]
    assert len({tuple(item) for item in positions}) == 16


def test_positions_are_normalized():
    field = compute_features(Patch(np.zeros(25)))
    assert field.data[:, :2].min() >= 0
    assert field.data[:, :2].max() <= 1


def test_ramp_gradient_magnitude_is_constant():
    ramp = Patch.from_grid(np.repeat(np.arange(3.0)[:, None], 3, axis=1))
    magnitude = compute_features(ramp).data[:, 3].reshape(3, 3)
    assert magnitude[1, 1] == pytest.approx(1.0)
    np.testing.assert_allclose(magnitude, 1.0)


def test_features_are_deterministic(random_patch):
    patch = random_patch(6)
    np.testing.assert_array_equal(compute_features(patch).data, compute_features(patch).data)


def test_gradient_magnitude_ignores_intensity_offset(random_patch):
    patch = random_patch(5)
    shifted = Patch(patch.data + 0.25)
    np.testing.assert_allclose(compute_features(patch).data[:, 3], compute_features(shifted).data[:, 3],
                               atol=1e-14)


def test_feature_weights_scale_components(random_patch):
    patch = random_patch(4)
    base = compute_features(patch).data
    scaled = compute_features(patch, FeatureConfig(position_weight=2.0, luminance_weight=0.0)).data
    np.testing.assert_allclose(scaled[:, :2], 2 * base[:, :2])
    np.testing.assert_array_equal(scaled[:, 2], 0)
    np.testing.assert_allclose(scaled[:, 3], base[:, 3])
    with pytest.raises(ValueError):
        FeatureConfig(gradient_weight=-1)


def test_luminance_bt601():
    rgb = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(luminance(rgb), [0.299, 0.587])
    np.testing.assert_array_equal(luminance(np.array([[0.1, 0.2]])), [0.1, 0.2])
    with pytest.raises(ValueError):
        luminance(np.zeros((2, 4)))


def test_feature_field_validation():
    with pytest.raises(ValueError):
        FeatureField(3, np.zeros((8, 4)))
    with pytest.raises(ValueError):
        FeatureField(2, np.full((4, 4), np.nan))
