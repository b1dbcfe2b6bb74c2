import pytest

from gglrlib.utils.configutils import read_config, write_config, normalize_key


def test_read_config(tmp_path):
    path = tmp_path / "restore.cfg"
    path.write_text("# tuned on the training set\nmu = 0.5\n\nmu-tilde=0.25   # cross prior\n sigma_a = 1 \n")
    assert read_config(str(path)) == {'mu': '0.5', 'mu_tilde': '0.25', 'sigma_a': '1'}


def test_read_config_rejects_bad_lines(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("mu 0.5\n")
    with pytest.raises(ValueError):
        read_config(str(path))


def test_write_config_round_trip(tmp_path):
    path = str(tmp_path / "tuned.cfg")
    write_config(path, {'rho': 1.0, 'mu': 0.25}, header="psnr_db 30.1")
    with open(path) as fp:
        assert fp.readline() == "# psnr_db 30.1\n"
    assert read_config(path) == {'mu': '0.25', 'rho': '1.0'}


def test_normalize_key():
    assert normalize_key(" cg-iters ") == "cg_iters"
