import numpy as np
import pytest

from gglrlib.utils.restore.formation import Identity, Mask, Blur, NoiseSpec, make_mask, add_awgn, \
    make_gaussian_kernel, model_for


def models(rng, shape=(6, 7)):
    n2 = shape[0] * shape[1]
    kernel = rng.uniform(size=(3, 5))
    return [
        Identity(shape),
        Mask(make_mask(n2, 0.5, 3).reshape(shape)),
        Blur(kernel / kernel.sum(), shape),
        Blur(make_gaussian_kernel(5, 1.5), shape),
        Blur(rng.uniform(size=(2, 4)), shape),
    ]


def test_identity():
    model = Identity((2, 2))
    x = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(model.apply(x), x)
    np.testing.assert_array_equal(model.adjoint(x), x)
    np.testing.assert_array_equal(model.gram_apply(x), x)


def test_mask_projection():
    model = Mask(np.array([1, 0, 1, 0]))
    x = np.array([4.0, 3.0, 2.0, 1.0])
    np.testing.assert_array_equal(model.apply(x), [4, 2])
    np.testing.assert_array_equal(model.adjoint(model.apply(x)), [4, 0, 2, 0])
    np.testing.assert_array_equal(model.gram_apply(x), [4, 0, 2, 0])
    with pytest.raises(ValueError):
        model.apply(np.ones(5))
    with pytest.raises(ValueError):
        Mask(np.ones(4), shape=(3, 3))


def test_unit_blur_is_identity(rng):
    model = Blur(np.ones((1, 1)), (4, 5))
    x = rng.standard_normal(20)
    np.testing.assert_allclose(model.apply(x), x)
    np.testing.assert_allclose(model.adjoint(x), x)


def test_blur_kernel_larger_than_patch():
    with pytest.raises(ValueError):
        Blur(np.ones((5, 5)), (4, 4))


def test_blur_preserves_constants():
    model = Blur(make_gaussian_kernel(5, 1.0), (8, 8))
    np.testing.assert_allclose(model.apply(np.full(64, 0.7)), 0.7)


def test_adjoint_consistency(rng):
    for model in models(rng):
        for _ in range(100):
            x = rng.standard_normal(model.size)
            y = rng.standard_normal(model.observed_size)
            assert model.apply(x) @ y == pytest.approx(x @ model.adjoint(y), abs=1e-10)


def test_gram_is_symmetric_psd(rng):
    for model in models(rng):
        for _ in range(20):
            x = rng.standard_normal(model.size)
            z = rng.standard_normal(model.size)
            assert model.gram_apply(x) @ x >= -1e-12
            assert model.gram_apply(x) @ z == pytest.approx(x @ model.gram_apply(z), abs=1e-10)


def test_models_act_channelwise(rng):
    for model in models(rng):
        x = rng.standard_normal((3, model.size))
        stacked = model.apply(x)
        for idx in range(3):
            np.testing.assert_allclose(stacked[idx], model.apply(x[idx]))


def test_crop():
    keep = make_mask(36, 0.5, 1).reshape(6, 6)
    cropped = Mask(keep).crop(2, 1, 3, 3)
    np.testing.assert_array_equal(cropped.keep, keep[2:5, 1:4].ravel())
    blur = Blur(make_gaussian_kernel(3, 1.0), (6, 6)).crop(0, 0, 4, 4)
    assert blur.shape == (4, 4)


def test_mask_initial_estimate_fills_planes():
    rows, cols = np.mgrid[0:8, 0:8]
    plane = (0.1 + 0.02 * rows + 0.03 * cols).ravel()
    model = Mask(make_mask(64, 0.5, 11).reshape(8, 8))
    estimate = model.initial_estimate(model.apply(plane))
    assert not np.any(np.isnan(estimate))
    np.testing.assert_array_equal(estimate[model.keep], plane[model.keep])
    # inside the hull of the kept samples linear interpolation is exact
    assert np.median(np.abs(estimate - plane)) < 1e-12


def test_make_mask():
    np.testing.assert_array_equal(make_mask(10, 1.0, 0), np.ones(10, dtype=bool))
    assert make_mask(4, 0.5, 42).sum() == 2
    assert make_mask(100, 0.2, 5).sum() == 20
    assert make_mask(36 * 36, 0.2, 1).sum() == int(np.floor(0.2 * 36 * 36 + 0.5))
    np.testing.assert_array_equal(make_mask(50, 0.3, 9), make_mask(50, 0.3, 9))
    for fraction in [0.0, 1.5, -0.2]:
        with pytest.raises(ValueError):
            make_mask(10, fraction, 0)


def test_add_awgn():
    x = np.linspace(0, 1, 20)
    np.testing.assert_array_equal(add_awgn(x, NoiseSpec(0, 3)), x)
    np.testing.assert_array_equal(add_awgn(x, NoiseSpec(10, 3)), add_awgn(x, NoiseSpec(10, 3)))
    assert not np.array_equal(add_awgn(x, NoiseSpec(10, 3)), add_awgn(x, NoiseSpec(10, 4)))

    noise = add_awgn(np.zeros(10 ** 6), NoiseSpec(25, 1), peak=255.0)
    assert 24.9 <= noise.std() <= 25.1
    normalized = add_awgn(np.zeros(10 ** 5), NoiseSpec(25.5, 1))
    assert normalized.std() == pytest.approx(0.1, rel=0.02)

    with pytest.raises(ValueError):
        NoiseSpec(-1)


def test_gaussian_kernel():
    np.testing.assert_array_equal(make_gaussian_kernel(1, 2.0), [[1.0]])
    kernel = make_gaussian_kernel(19, 2.0)
    assert kernel.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(kernel, kernel.T)
    np.testing.assert_allclose(kernel, kernel[::-1, ::-1])
    assert kernel[9, 9] == kernel.max()
    with pytest.raises(ValueError):
        make_gaussian_kernel(4, 1.0)


def test_model_for():
    assert isinstance(model_for('denoise', (4, 4)), Identity)
    assert isinstance(model_for('interpolate', (2, 2), keep=[1, 0, 0, 1]), Mask)
    assert isinstance(model_for('deblur', (4, 4), kernel=np.ones((3, 3)) / 9), Blur)
    with pytest.raises(ValueError):
        model_for('interpolate', (2, 2))
    with pytest.raises(ValueError):
        model_for('inpaint', (2, 2))
