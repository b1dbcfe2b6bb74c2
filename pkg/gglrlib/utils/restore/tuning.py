"""
Parameter tuning by coordinate descent over log-spaced grids, maximizing the mean PSNR of restored
training images against their clean versions
"""
import logging
from timeit import default_timer as timer

import numpy as np
import pandas as pd

from ..graph.core import KernelParams
from ..prior.gng import PriorBuilder
from . import report
from .runners import restore, TASK_MODELS
from .solvers import AdmmConfig

PARAM_NAMES = ['rho', 'rho_tilde', 'mu', 'mu_tilde', 'sigma_f', 'sigma_x', 'sigma_a']

LOG_GRID = [0.125, 0.25, 0.5, 1.0, 2.0]

DEFAULT_SEARCH_SPACE = {
    'mu': LOG_GRID,
    'mu_tilde': LOG_GRID,
    'sigma_a': LOG_GRID,
}


def current_params(config, builder):
    params = {
        'rho': config.rho,
        'rho_tilde': config.rho_tilde,
        'mu': builder.mu,
        'mu_tilde': builder.mu_tilde,
    }
    params.update(builder.kernel.to_dict())
    return params


def _task_of(model):
    for task, model_class in TASK_MODELS.items():
        if isinstance(model, model_class):
            return task
    raise ValueError("No restoration task for model %s" % type(model).__name__)


def _nearest(grid, value):
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("Search grids must be positive, got %s" % str(grid.tolist()))
    return float(grid[np.argmin(np.abs(np.log(grid) - np.log(value)))])


class Tuner(object):
    def __init__(self, train_pairs, models, config, builder, **kwargs):
        self.train_pairs = train_pairs
        self.models = models
        self.config = config
        self.builder = builder
        self.n_jobs = kwargs.get('n_jobs', 1)
        self.patch_size = kwargs.get('patch_size', 36)
        self.stride = kwargs.get('stride', 32)
        self.logger = kwargs.get('logger', None) or report.Logger("Tuning")
        self.restore_logger = report.Logger("Tuning restore", active=False)
        self.scores = {}
        self.history = []

    def configure(self, params):
        config = self.config.copy(rho=params['rho'], rho_tilde=params['rho_tilde'])
        builder = PriorBuilder(
            kind=self.builder.kind,
            normalization=self.builder.normalization,
            mu=params['mu'],
            mu_tilde=params['mu_tilde'],
            kernel=KernelParams(sigma_f=params['sigma_f'], sigma_x=params['sigma_x'], sigma_a=params['sigma_a']),
            feature_config=self.builder.feature_config
        )
        return config, builder

    def evaluate(self, params):
        key = tuple(params[name] for name in PARAM_NAMES)
        if key in self.scores:
            return self.scores[key]

        start = timer()
        config, builder = self.configure(params)
        values = []
        for (clean, degraded), model in zip(self.train_pairs, self.models):
            restored, _ = restore(degraded, _task_of(model), model, config, builder, n_jobs=self.n_jobs,
                                  patch_size=self.patch_size, stride=self.stride,
                                  logger=self.restore_logger)
            values.append(report.psnr(restored, clean))
        score = float(np.mean(values))

        self.scores[key] = score
        row = dict(params)
        row['psnr_db'] = score
        self.history.append(row)
        self.logger.log("Evaluated %s -> %.4f dB: %.5f secs" % (str(key), score, timer() - start))
        return score


def tune_params(train_pairs, model, config=None, search_space=None, **kwargs):
    """
    Coordinate descent over per parameter grids.
    The start point takes, for every searched parameter, the grid value nearest (in log scale) to the
    current setting; a move is accepted only when it strictly improves the mean PSNR, and sweeps repeat
    until a full sweep brings no improvement.
    :param train_pairs: list of (clean Image, degraded Image)
    :param model: FormationModel shared by all pairs, or one per pair
    :param config: AdmmConfig holding the solver settings and the starting penalties
    :param search_space: dict parameter name -> list of candidate values
    :param kwargs: builder (PriorBuilder with the starting prior settings), n_jobs, patch_size, stride, logger
    :return: (best parameters, mean PSNR at the best point, pandas DataFrame of evaluated points)
    """
    if len(train_pairs) == 0:
        raise ValueError("Tuning needs at least one training pair")

    config = config if config is not None else AdmmConfig()
    builder = kwargs.pop('builder', None) or PriorBuilder()
    search_space = dict(search_space if search_space is not None else DEFAULT_SEARCH_SPACE)
    for name, grid in search_space.items():
        if name not in PARAM_NAMES:
            raise ValueError("Cannot tune unknown parameter: %s" % name)
        if len(grid) == 0:
            raise ValueError("Empty search grid for %s" % name)

    models = model if isinstance(model, (list, tuple)) else [model] * len(train_pairs)
    if len(models) != len(train_pairs):
        raise ValueError("Got %d models for %d training pairs" % (len(models), len(train_pairs)))

    tuner = Tuner(train_pairs, models, config, builder, **kwargs)
    begin = timer()

    best = current_params(config, builder)
    for name, grid in search_space.items():
        best[name] = _nearest(grid, best[name])
    best_score = tuner.evaluate(best)

    improved = True
    sweeps = 0
    while improved:
        improved = False
        sweeps += 1
        for name, grid in search_space.items():
            for value in grid:
                candidate = dict(best)
                candidate[name] = float(value)
                score = tuner.evaluate(candidate)
                if score > best_score:
                    best, best_score = candidate, score
                    improved = True

    tuner.logger.log("Tuning finished after %d sweeps, %d evaluations, best %.4f dB: %.5f secs"
                     % (sweeps, len(tuner.history), best_score, timer() - begin), logging.INFO)

    return best, best_score, pd.DataFrame(tuner.history, columns=PARAM_NAMES + ['psnr_db'])
