from types import SimpleNamespace

import numpy as np
import pytest

from gglrlib.cli import main, parse_grid, resolve_options, build_parser, PREPARE, EXIT_OK, EXIT_IO, \
    EXIT_INVALID, EXIT_SOLVER
from gglrlib.utils.restore.formation import Identity, Mask, Blur
from gglrlib.utils.restore.runners import Image
from gglrlib.utils.imageutils import read_pnm, write_pnm, read_mask
from gglrlib.utils.configutils import read_config


def integer_plane(side):
    rows, cols = np.mgrid[0:side, 0:side]
    return ((2 * rows + 3 * cols + 10) / 255.0)[None]


@pytest.fixture
def gray_image(tmp_path, rng):
    path = str(tmp_path / "input.pgm")
    write_pnm(path, rng.integers(0, 256, size=(1, 12, 12)) / 255.0)
    return path


def metrics(captured):
    header, line = captured.out.strip().splitlines()[-2:]
    return dict(zip(header.split(","), line.split(",")))


def test_denoise_without_noise_is_near_identity(gray_image, tmp_path, capsys):
    out = str(tmp_path / "out.pgm")
    code = main(["denoise", gray_image, out, "--ref", gray_image, "--mu", "1e-6", "--mu-tilde", "1e-6"])
    assert code == EXIT_OK
    record = metrics(capsys.readouterr())
    assert record['task'] == 'denoise' and record['aux'] == '1'
    assert float(record['psnr_db']) >= 60
    assert read_pnm(out).shape == (1, 12, 12)


def test_interpolate_recovers_integer_plane(tmp_path, capsys):
    side = 12
    source = str(tmp_path / "plane.pgm")
    out = str(tmp_path / "filled.pgm")
    write_pnm(source, integer_plane(side))
    code = main(["interpolate", source, out, "--keep", "0.5", "--aux", "4", "--layers", "200", "--cg-iters", "30",
                 "--fixed-graphs", "--patch", str(side), "--ref", source])
    assert code == EXIT_OK
    np.testing.assert_array_equal(read_pnm(out), read_pnm(source))
    assert "max_abs_error" in capsys.readouterr().err


def test_metrics_csv_is_appended(gray_image, tmp_path):
    csv_file = tmp_path / "runs.csv"
    for _ in range(2):
        assert main(["denoise", gray_image, str(tmp_path / "out.pgm"), "--ref", gray_image, "--layers", "2",
                     "--csv", str(csv_file)]) == EXIT_OK
    lines = csv_file.read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("task,aux")


def test_exit_codes(gray_image, tmp_path):
    out = str(tmp_path / "out.pgm")
    assert main(["denoise", str(tmp_path / "missing.pgm"), out]) == EXIT_IO
    assert main(["denoise", gray_image, out, "--aux", "3"]) == EXIT_INVALID
    assert main(["denoise", gray_image, out, "--mu", "-1"]) == EXIT_INVALID
    assert main(["denoise", gray_image, out, "--sigma", "-5"]) == EXIT_INVALID
    assert main(["interpolate", gray_image, out]) == EXIT_INVALID
    assert main(["interpolate", gray_image, out, "--keep", "1.5"]) == EXIT_INVALID
    assert main(["deblur", gray_image, out]) == EXIT_INVALID
    assert main(["deblur", gray_image, out, "--blur-size", "4"]) == EXIT_INVALID
    assert main(["spectrum", "--n", "2"]) == EXIT_INVALID
    assert main(["denoise", gray_image, out, "--aux", "0", "--cg-tol", "1e-300", "--patch", "12"]) == EXIT_SOLVER
    with pytest.raises(SystemExit) as e:
        main(["denoise", gray_image, out, "--no-such-flag"])
    assert e.value.code == 2


def test_config_file_and_flag_precedence(gray_image, tmp_path, capsys):
    cfg = tmp_path / "restore.cfg"
    cfg.write_text("# near identity\nmu = 1e-6\nmu-tilde = 1e-6\naux = 2\n")
    out = str(tmp_path / "out.pgm")
    assert main(["denoise", gray_image, out, "--ref", gray_image, "--config", str(cfg), "--aux", "4"]) == EXIT_OK
    record = metrics(capsys.readouterr())
    assert record['aux'] == '4'
    assert float(record['psnr_db']) >= 60

    cfg.write_text("lambda = 2\n")
    assert main(["denoise", gray_image, out, "--config", str(cfg)]) == EXIT_INVALID


def test_resolve_options_defaults():
    args = build_parser().parse_args(["denoise", "in.pgm", "out.pgm", "--layers", "3"])
    options = resolve_options(args)
    assert options['layers'] == 3 and options['aux'] == 1 and options['fixed_graphs'] is False


def test_prepare_builds_task_models(rng):
    image = Image(rng.uniform(size=(8, 8)))
    options = {'seed': 3}
    _, model = PREPARE['denoise'](SimpleNamespace(sigma=0), options, image)
    assert isinstance(model, Identity) and model.shape == (8, 8)

    masked, model = PREPARE['interpolate'](SimpleNamespace(mask=None, keep=0.5), options, image)
    assert isinstance(model, Mask) and model.shape == (8, 8)
    assert np.all(masked.data[0].ravel()[~model.keep] == 0)

    args = SimpleNamespace(kernel=None, blur_size=3, blur_std=1.0, synthesize=False, sigma=0)
    same, model = PREPARE['deblur'](args, options, image)
    assert isinstance(model, Blur) and same is image


def test_degrade_is_seeded(gray_image, tmp_path):
    first, second = str(tmp_path / "a.pgm"), str(tmp_path / "b.pgm")
    for out in [first, second]:
        assert main(["degrade", gray_image, out, "--awgn", "10", "--mask", "0.3", "--blur-size", "3",
                     "--blur-std", "1", "--seed", "5"]) == EXIT_OK
    np.testing.assert_array_equal(read_pnm(first), read_pnm(second))
    keep = read_mask(str(tmp_path / "a_mask.pgm"))
    assert keep.sum() == int(np.floor(0.3 * 144 + 0.5))
    assert np.all(read_pnm(first)[0][~keep] == 0)


def test_spectrum_of_unit_weights(capsys):
    assert main(["spectrum", "--n", "3", "--weight", "1"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    values = [float(item) for item in lines[0].split(":")[1].split()]
    np.testing.assert_allclose(values, [0.0, 0.0, 6.0], atol=1e-9)
    assert lines[1] == "null_dim: 2"


def test_spectrum_normalized(capsys):
    assert main(["spectrum", "--n", "8", "--seed", "3", "--normalized"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert float(lines[0].split("=")[1]) == pytest.approx(0.0, abs=1e-12)
    assert lines[-1] == "null_dim: 2"


def test_tune_echoes_single_point_grid(tmp_path, rng, capsys):
    train = tmp_path / "train"
    train.mkdir()
    clean = integer_plane(10)
    write_pnm(str(train / "a.clean.pgm"), clean)
    write_pnm(str(train / "a.degraded.pgm"), np.clip(clean + rng.normal(0, 0.05, clean.shape), 0, 1))
    best = str(tmp_path / "best.cfg")
    assert main(["tune", str(train), "--out", best, "--grid", "mu=0.25", "--grid", "mu-tilde=2",
                 "--layers", "2", "--cg-iters", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "mu = 0.25" in out and "mu_tilde = 2.0" in out
    params = read_config(best)
    assert float(params['mu']) == 0.25 and float(params['mu_tilde']) == 2.0
    assert (tmp_path / "best_history.csv").exists()

    assert main(["denoise", str(train / "a.degraded.pgm"), str(tmp_path / "o.pgm"), "--config", best]) == EXIT_OK
    assert main(["tune", str(tmp_path / "empty"), "--out", best]) == EXIT_IO


def test_parse_grid():
    assert parse_grid(["mu=0.5,1", "sigma-a=2"]) == {'mu': [0.5, 1.0], 'sigma_a': [2.0]}
    for item in ["mu", "mu=", "mu=-1", "lambda=1", "mu=a"]:
        with pytest.raises(ValueError):
            parse_grid([item])
