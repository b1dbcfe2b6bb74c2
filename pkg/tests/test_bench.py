import numpy as np
import pytest

from gglrlib.utils.restore import bench, report
from gglrlib.utils.restore.bench import SelfTest, make_piecewise_planar, planar_image
from gglrlib.utils.restore.solvers import AUX1, AUX2, AUX4


@pytest.fixture
def selftest():
    return SelfTest(seed=0, logger=report.Logger("Bench test", active=False))


@pytest.mark.parametrize("suite", ['null_space', 'counterexample', 'tse_decay', 'round_trips', 'cg_oracle',
                                   'planar_recovery'])
def test_fast_suites_pass(selftest, suite):
    passed, detail = getattr(selftest, suite)()
    assert passed, detail


def test_psd_suite(selftest):
    passed, detail = selftest.psd(trials=5)
    assert passed, detail


def test_solver_equivalence_suite(selftest):
    passed, detail = selftest.solver_equivalence(instances=1, side=4, layers=200)
    assert passed, detail


def test_reduced_denoise_benchmark(selftest):
    passed, detail = selftest.denoise_benchmark(size=64, train_size=36, grid=[0.5, 1.0])
    assert passed, detail
    scores = selftest.benchmark
    assert set(scores) == {'gglr_aux1', 'gglr_aux2', 'gglr_aux4', 'glr_aux1', 'noisy'}
    assert scores['gglr_aux1'] - scores['noisy'] >= 3.0
    assert scores['gglr_aux1'] >= scores['glr_aux1']


def test_benchmark_tunes_each_split(selftest, monkeypatch):
    calls = []

    def fixed_tuning(train, model, config, space, **kwargs):
        calls.append((kwargs['builder'].kind, config.family))
        return {'mu': 1.0, 'mu_tilde': 1.0}, 0.0, None

    monkeypatch.setattr(bench, 'tune_params', fixed_tuning)
    selftest.denoise_benchmark(size=40, train_size=36, grid=[1.0])
    assert calls == [('gglr', AUX1), ('gglr', AUX2), ('gglr', AUX4), ('glr', AUX1)]


def test_suite_listing():
    names = [name for name, _ in SelfTest().suites()]
    assert names[0] == 'null_space' and 'denoise_benchmark' not in names
    assert [name for name, _ in SelfTest(full=True).suites()][-1] == 'denoise_benchmark'


def test_run_reports_failures():
    runner = SelfTest(logger=report.Logger("Bench failure test", active=False))

    def broken():
        raise RuntimeError("boom")

    runner.suites = lambda: [('broken', broken), ('counterexample', runner.counterexample)]
    results = runner.run()
    assert [(name, passed) for name, passed, _, _ in results] == [('broken', False), ('counterexample', True)]
    assert "boom" in results[0][3]
    assert set(runner.run_metrics) == {'broken', 'counterexample'}


def test_synthetic_images():
    image = make_piecewise_planar(32, seed=1)
    assert image.shape == (32, 32)
    assert image.min() >= 0 and image.max() <= 1
    np.testing.assert_array_equal(image, make_piecewise_planar(32, seed=1))
    plane = planar_image(8)
    assert plane[0, 0] == pytest.approx(0.2) and plane[-1, -1] == pytest.approx(0.9)
