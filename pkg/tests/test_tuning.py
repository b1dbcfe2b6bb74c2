import numpy as np
import pytest

from gglrlib.utils.prior.gng import PriorBuilder
from gglrlib.utils.restore import report
from gglrlib.utils.restore.formation import Identity, NoiseSpec, add_awgn
from gglrlib.utils.restore.runners import Image
from gglrlib.utils.restore.solvers import AdmmConfig
from gglrlib.utils.restore.tuning import tune_params, current_params, _nearest, PARAM_NAMES

QUIET = report.Logger("Tuning test", active=False)

FAST = AdmmConfig(outer_layers=2, cg_iters=3)


@pytest.fixture
def train_pairs(rng):
    pairs = []
    for seed in range(2):
        rows, cols = np.mgrid[0:10, 0:10] / 10.0
        clean = Image(0.2 + 0.3 * rows + 0.4 * cols * (rows > 0.5))
        pairs.append((clean, Image(add_awgn(clean.data, NoiseSpec(20, seed)))))
    return pairs


def test_single_point_grid_is_echoed(train_pairs):
    best, score, history = tune_params(train_pairs, Identity((10, 10)), FAST, {'mu': [0.25], 'mu_tilde': [2.0]},
                                       logger=QUIET)
    assert best['mu'] == 0.25 and best['mu_tilde'] == 2.0
    assert len(history) == 1
    assert score == pytest.approx(history['psnr_db'].iloc[0])


def test_result_is_a_local_optimum(train_pairs):
    grid = [0.125, 0.5, 2.0]
    best, score, history = tune_params(train_pairs, Identity((10, 10)), FAST, {'mu': grid, 'mu_tilde': grid},
                                       logger=QUIET)
    assert list(history.columns) == PARAM_NAMES + ['psnr_db']
    assert score == history['psnr_db'].max()
    for name in ['mu', 'mu_tilde']:
        others = [other for other in ['mu', 'mu_tilde'] if other != name]
        for value in grid:
            rows = history[(history[name] == value) & (history[others[0]] == best[others[0]])]
            assert len(rows) == 1
            assert rows['psnr_db'].iloc[0] <= score


def test_start_point_uses_nearest_grid_value():
    assert _nearest([0.125, 0.5, 2.0], 0.3) == 0.5
    assert _nearest([0.125, 0.5, 2.0], 0.2) == 0.125
    with pytest.raises(ValueError):
        _nearest([0.0, 1.0], 0.5)


def test_current_params():
    params = current_params(AdmmConfig(rho=2.0), PriorBuilder(mu=0.3))
    assert sorted(params) == sorted(PARAM_NAMES)
    assert params['rho'] == 2.0 and params['mu'] == 0.3 and params['sigma_x'] == 0.1


def test_invalid_tuning_jobs(train_pairs):
    with pytest.raises(ValueError):
        tune_params([], Identity((10, 10)), FAST, logger=QUIET)
    with pytest.raises(ValueError):
        tune_params(train_pairs, Identity((10, 10)), FAST, {'lambda': [1.0]}, logger=QUIET)
    with pytest.raises(ValueError):
        tune_params(train_pairs, Identity((10, 10)), FAST, {'mu': []}, logger=QUIET)
    with pytest.raises(ValueError):
        tune_params(train_pairs, [Identity((10, 10))], FAST, {'mu': [1.0]}, logger=QUIET)
