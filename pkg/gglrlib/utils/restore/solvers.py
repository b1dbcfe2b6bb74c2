"""
Conjugate gradient, the direct solve of the restoration QP and the ADMM solvers with 1, 2 or 4
auxiliary variables run as K outer layers with graph re-learning.

All splits share one scheme. The prior is cut into blocks (L_b, mu_b, rho_b) and each layer does

    (2 A^T A + sum_b rho_b I) x = 2 A^T y + sum_b rho_b (z_b - lam_b)
    (I + 2 mu_b / rho_b L_b) z_b = x + lam_b
    lam_b <- lam_b + x - z_b

with every linear system solved by a few warm started CG iterations.
"""
import logging
from timeit import default_timer as timer

import numpy as np
from scipy.sparse.linalg import aslinearoperator

from ..graph.core import KernelParams, laplacian, line_graph, edge_weights, random_walk_laplacian, \
    INTENSITY_MODE, Graph
from ..graph.spectral import tse_apply, null_mode_gain
from ..prior.gng import Patch, PriorBuilder, grid_edges
from ..prior.operators import ROW, COL, CROSS_COL, CROSS_ROW
from . import report

DIRECT = 'direct'
AUX1 = 'aux1'
AUX2 = 'aux2'
AUX4 = 'aux4'
FAMILIES = [DIRECT, AUX1, AUX2, AUX4]

# --aux values on the command line
AUX_COUNTS = {0: DIRECT, 1: AUX1, 2: AUX2, 4: AUX4}

DIRECT_ITER_FACTOR = 5


class SolverError(RuntimeError):
    pass


class ConvergenceError(SolverError):
    pass


class AdmmConfig(object):
    def __init__(self, **kwargs):
        self.family = kwargs.get('family', AUX1)
        self.rho = float(kwargs.get('rho', 1.0))
        self.rho_tilde = float(kwargs.get('rho_tilde', 1.0))
        self.outer_layers = int(kwargs.get('outer_layers', 10))
        self.cg_iters = int(kwargs.get('cg_iters', 10))
        self.cg_tol = float(kwargs.get('cg_tol', 1e-8))
        self.relearn_graphs = bool(kwargs.get('relearn_graphs', True))
        self.validate()

    def validate(self):
        if self.family not in FAMILIES:
            raise ValueError("Unknown solver family: %s" % self.family)
        if not self.rho > 0 or not self.rho_tilde > 0:
            raise ValueError("Penalties must be > 0, got rho=%s, rho_tilde=%s" % (self.rho, self.rho_tilde))
        if self.outer_layers < 1 or self.cg_iters < 1:
            raise ValueError("Layer counts must be >= 1, got K=%d, L=%d" % (self.outer_layers, self.cg_iters))
        if self.cg_tol < 0:
            raise ValueError("CG tolerance must be >= 0, got %s" % self.cg_tol)
        return True

    @property
    def aux_count(self):
        for count, family in AUX_COUNTS.items():
            if family == self.family:
                return count

    def copy(self, **kwargs):
        params = dict(self.__dict__)
        params.update(kwargs)
        return AdmmConfig(**params)


class AdmmState(object):
    """
    Iterates of a multi-block ADMM run. zs and lams hold one (channels, N^2) array per auxiliary.
    """

    def __init__(self, x, num_blocks):
        self.x = np.array(x, dtype=float)
        self.zs = [self.x.copy() for _ in range(num_blocks)]
        self.lams = [np.zeros_like(self.x) for _ in range(num_blocks)]
        self.layer = 0
        self.cg_steps = 0
        self.history = []

    @property
    def z(self):
        return self.zs[0]

    @property
    def z_tilde(self):
        return self.zs[1] if len(self.zs) > 1 else None

    def primal_residual(self):
        if len(self.zs) == 0:
            return 0.0
        return float(max(np.max(np.abs(self.x - z)) for z in self.zs))

    def graph_source(self):
        return np.mean(self.zs, axis=0) if len(self.zs) > 0 else self.x


def _matvec(op):
    if callable(op):
        return op
    return aslinearoperator(op).matvec


def cg_solve(op, b, iters, tol=1e-8, x0=None):
    """
    Conjugate gradient for a symmetric positive (semi) definite operator
    :param op: matrix, LinearOperator or callable v -> Mv
    :param b: right hand side
    :param iters: maximum number of iterations
    :param tol: stop once |r| / |b| <= tol
    :param x0: warm start, zero when None
    :return: (x, info) with info keys niter, success, res_norm
    """
    matvec = _matvec(op)
    b = np.asarray(b, dtype=float)
    b_norm = np.linalg.norm(b)

    if b_norm == 0:
        return np.zeros_like(b), {'niter': 0, 'success': True, 'res_norm': 0.0}

    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = np.array(x0, dtype=float)
        r = b - matvec(x)
    p = r.copy()
    rr = r @ r

    niter = 0
    for niter in range(1, iters + 1):
        if np.sqrt(rr) <= tol * b_norm:
            niter -= 1
            break
        Mp = matvec(p)
        pMp = p @ Mp
        if pMp <= 0:
            raise SolverError("Operator is not positive definite: p^T M p = %.3e at iteration %d" % (pMp, niter))
        alpha = rr / pMp
        x += alpha * p
        r -= alpha * Mp
        rr_next = r @ r
        p = r + (rr_next / rr) * p
        rr = rr_next

    res_norm = float(np.sqrt(rr))
    return x, {'niter': niter, 'success': res_norm <= tol * b_norm, 'res_norm': res_norm}


def _channels(y):
    y = np.asarray(y, dtype=float)
    return (y[None, :], True) if y.ndim == 1 else (y, False)


def direct_solve(prior, model, y, tol=1e-8, x0=None):
    """
    Solves (A^T A + mu L + mu_tilde Lt) x = A^T y with CG capped at 5 N^2 iterations
    :raises ConvergenceError: when the cap is hit, e.g. a sparse mask with vanishing prior weights
    """
    ys, squeeze = _channels(y)
    system = prior.operator()
    cap = DIRECT_ITER_FACTOR * prior.dim

    def apply_system(v):
        return model.gram_apply(v) + system @ v

    xs = np.zeros((ys.shape[0], prior.dim))
    for idx, channel in enumerate(ys):
        start = None if x0 is None else _channels(x0)[0][idx]
        xs[idx], info = cg_solve(apply_system, model.adjoint(channel), cap, tol, x0=start)
        if not info['success']:
            raise ConvergenceError("Direct solve did not converge in %d iterations (residual %.3e)"
                                   % (cap, info['res_norm']))
    return xs[0] if squeeze else xs


def split_blocks(prior, config):
    """
    Splits a prior into ADMM blocks (Laplacian, weight, penalty) for the configured family
    """
    if config.family == AUX1:
        return [(prior.operator(), 1.0, config.rho)]
    if config.family == AUX2:
        return [(prior.L_inline, prior.mu, config.rho), (prior.L_cross, prior.mu_tilde, config.rho_tilde)]
    if config.family == AUX4:
        terms = prior.component_terms
        if terms is None:
            raise SolverError("The 4 auxiliary split needs a prior built with its component terms")
        return [
            (terms[ROW], prior.mu, config.rho),
            (terms[COL], prior.mu, config.rho),
            (terms[CROSS_COL], prior.mu_tilde, config.rho_tilde),
            (terms[CROSS_ROW], prior.mu_tilde, config.rho_tilde),
        ]
    raise ValueError("Family %s has no auxiliary split" % config.family)


def assemble_x_hat(zs, lams):
    """
    sum_b (z_b - lam_b), the consensus target of the x-update when all penalties are equal
    """
    return np.sum([z - lam for z, lam in zip(zs, lams)], axis=0)


class PnpRunner(object):
    """
    Runs a solver family on one patch, re-learning the prior from the auxiliaries between layers
    """

    def __init__(self, model, builder=None, config=None, **kwargs):
        self.model = model
        self.builder = builder if builder is not None else PriorBuilder()
        self.config = config if config is not None else AdmmConfig()
        self.logger = kwargs.get('logger', None) or report.Logger("PnP %s" % self.config.family)

    def build_prior(self, estimate):
        return self.builder.build(Patch(estimate), keep_components=self.config.family == AUX4)

    def run(self, y, prior=None, x0=None):
        """
        :param y: observation, (m,) or (channels, m)
        :param prior: fixed starting prior, built from the initial estimate when None
        :param x0: initial estimate, the model's initial estimate of y when None
        :return: (x, state)
        """
        ys, squeeze = _channels(y)
        begin = timer()
        start = self.model.initial_estimate(ys) if x0 is None else _channels(x0)[0].copy()
        if prior is None:
            prior = self.build_prior(start)

        if self.config.family == DIRECT:
            state = self._run_direct(ys, prior, start)
        else:
            state = self._run_admm(ys, prior, start)

        self.logger.log("Solved %d layers: %.5f secs" % (state.layer, timer() - begin))
        return (state.x[0] if squeeze else state.x), state

    def _run_direct(self, ys, prior, start):
        cfg = self.config
        state = AdmmState(start, 0)
        layers = cfg.outer_layers if cfg.relearn_graphs else 1
        for layer in range(layers):
            state.x = direct_solve(prior, self.model, ys, cfg.cg_tol, x0=state.x)
            state.layer = layer + 1
            state.history.append({'layer': state.layer, 'primal': 0.0})
            if cfg.relearn_graphs and layer < layers - 1:
                prior = self.build_prior(state.x)
        return state

    def _run_admm(self, ys, prior, start):
        cfg = self.config
        blocks = split_blocks(prior, cfg)
        state = AdmmState(start, len(blocks))
        rhs_data = 2.0 * self.model.adjoint(ys)
        penalty = sum(block[2] for block in blocks)

        def apply_x(v):
            return 2.0 * self.model.gram_apply(v) + penalty * v

        for layer in range(cfg.outer_layers):
            for idx in range(ys.shape[0]):
                rhs = rhs_data[idx] + sum(rho * (z[idx] - lam[idx])
                                          for (_, _, rho), z, lam in zip(blocks, state.zs, state.lams))
                state.x[idx], info = cg_solve(apply_x, rhs, cfg.cg_iters, cfg.cg_tol, x0=state.x[idx])
                state.cg_steps += info['niter']

            for (L, weight, rho), z, lam in zip(blocks, state.zs, state.lams):
                system = L * (2.0 * weight / rho)

                def apply_z(v, system=system):
                    return v + system @ v

                for idx in range(ys.shape[0]):
                    z[idx], info = cg_solve(apply_z, state.x[idx] + lam[idx], cfg.cg_iters, cfg.cg_tol, x0=z[idx])
                    state.cg_steps += info['niter']
                lam += state.x - z

            state.layer = layer + 1
            residual = state.primal_residual()
            state.history.append({'layer': state.layer, 'primal': residual})
            self.logger.log("Layer %d primal residual %.3e" % (state.layer, residual), logging.DEBUG)

            if cfg.relearn_graphs and layer < cfg.outer_layers - 1:
                blocks = split_blocks(self.build_prior(state.graph_source()), cfg)
        return state


def solve(y, model, prior, config, builder=None):
    """
    Runs config.family from prior; without a builder, re-learned graphs keep the weights and settings of prior
    """
    if builder is None:
        builder = PriorBuilder.from_prior(prior)
    x, _ = PnpRunner(model, builder, config).run(y, prior=prior)
    return x


def admm_aux1(y, model, prior, config=None, builder=None):
    config = config.copy(family=AUX1) if config is not None else AdmmConfig(family=AUX1)
    return solve(y, model, prior, config, builder)


def admm_aux2(y, model, prior, config=None, builder=None):
    config = config.copy(family=AUX2) if config is not None else AdmmConfig(family=AUX2)
    return solve(y, model, prior, config, builder)


def admm_aux4(y, model, prior, config=None, builder=None):
    config = config.copy(family=AUX4) if config is not None else AdmmConfig(family=AUX4)
    return solve(y, model, prior, config, builder)


def _pixel_graph(signal, features, params):
    if signal.ndim == 1:
        features = np.zeros((signal.shape[0], 1)) if features is None else np.asarray(features)
        i = np.arange(signal.shape[0] - 1)
        weights = edge_weights(features[i], features[i + 1], signal[i], signal[i + 1], params, INTENSITY_MODE)
        return laplacian(line_graph(weights))

    side = signal.shape[0]
    flat = signal.ravel()
    features = np.zeros((flat.shape[0], 1)) if features is None else np.asarray(features)
    horizontal, vertical = grid_edges(side)
    i = np.concatenate([horizontal[0], vertical[0]])
    j = np.concatenate([horizontal[1], vertical[1]])
    weights = edge_weights(features[i], features[j], flat[i], flat[j], params, INTENSITY_MODE)
    return laplacian(Graph(flat.shape[0], list(zip(i, j, weights))))


def glr_iterative_filter(y, params=None, mu=0.1, iters=10, features=None, renormalize=False):
    """
    Iterative GLR smoothing: re-learns pixel graph weights from the current signal and applies the
    truncated Taylor low-pass filter of its random walk Laplacian
    :param y: 1-D signal on a line graph or square 2-D patch on a 4-connected grid
    :param params: KernelParams
    :param mu: filter strength, small values (<= 0.3) keep the Taylor approximation accurate
    :param iters: number of filtering steps
    :param features: optional per sample features
    :param renormalize: divide each step by the filter's zero frequency gain
    :return: filtered signal of the shape of y
    """
    if params is None:
        params = KernelParams()
    signal = np.array(y, dtype=float)
    if signal.ndim == 2 and signal.shape[0] != signal.shape[1]:
        raise ValueError("Grid signals must be square, got shape %s" % str(signal.shape))
    if mu == 0:
        return signal

    gain = null_mode_gain(mu)
    for _ in range(iters):
        L_rw = random_walk_laplacian(_pixel_graph(signal, features, params))
        step = tse_apply(L_rw, mu, signal.ravel())
        if renormalize:
            step = step / gain
        signal = step.reshape(signal.shape)
    return signal
