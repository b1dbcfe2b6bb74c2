"""
Property suites run by `gglr selftest`, and the desk-scale denoising benchmark behind `--full`
"""
import logging
from timeit import default_timer as timer

import numpy as np
import scipy.linalg as linalg

from ..graph.core import KernelParams, laplacian, line_graph, random_walk_laplacian, path_laplacian, glr
from ..graph.spectral import spectrum, null_space_dim, subspace_angle, tse_filter
from ..imageutils import encode_pnm, decode_pnm
from ..prior.gng import Patch, PriorBuilder, build_prior
from ..prior.operators import grad_op, gng_laplacian
from . import report
from .formation import Identity, Mask, Blur, NoiseSpec, make_mask, make_gaussian_kernel, add_awgn
from .runners import Image, patchify, aggregate, restore
from .solvers import AdmmConfig, cg_solve, direct_solve, split_blocks, solve, AUX1, AUX2, AUX4
from .tuning import tune_params

COUNTEREXAMPLE = np.array([[1.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 1.0]])

PSD_TOLERANCE = -1e-10


def make_piecewise_planar(size, seed=0, regions=2):
    """
    Synthetic image made of planar pieces split by random straight edges
    :param size: side of the square image
    :param seed: generator seed
    :param regions: number of random cuts, giving up to 2^regions pieces
    :return: (size, size) array on [0, 1]
    """
    rng = np.random.default_rng(seed)
    rows, cols = np.mgrid[0:size, 0:size] / float(size)

    label = np.zeros((size, size), dtype=int)
    for idx in range(regions):
        angle = rng.uniform(0, np.pi)
        offset = rng.uniform(0.3, 0.7)
        side = (rows - offset) * np.cos(angle) + (cols - offset) * np.sin(angle) > 0
        label += side.astype(int) << idx

    image = np.zeros((size, size))
    for value in range(2 ** regions):
        level = rng.uniform(0.2, 0.8)
        slope_r, slope_c = rng.uniform(-0.3, 0.3, size=2)
        plane = level + slope_r * (rows - 0.5) + slope_c * (cols - 0.5)
        image[label == value] = plane[label == value]
    return np.clip(image, 0.0, 1.0)


def planar_image(size, slope_r=0.3, slope_c=0.4, level=0.2):
    rows, cols = np.mgrid[0:size, 0:size] / float(size - 1)
    return level + slope_r * rows + slope_c * cols


class SelfTest(object):
    def __init__(self, **kwargs):
        self.seed = kwargs.get('seed', 0)
        self.full = kwargs.get('full', False)
        self.logger = kwargs.get('logger', None) or report.Logger("Selftest")
        self.n_jobs = kwargs.get('n_jobs', 1)
        self.run_metrics = {}
        self.benchmark = {}

    def suites(self):
        suites = [
            ('null_space', self.null_space),
            ('psd', self.psd),
            ('solver_equivalence', self.solver_equivalence),
            ('cg_oracle', self.cg_oracle),
            ('planar_recovery', self.planar_recovery),
            ('counterexample', self.counterexample),
            ('tse_decay', self.tse_decay),
            ('round_trips', self.round_trips),
        ]
        if self.full:
            suites.append(('denoise_benchmark', self.denoise_benchmark))
        return suites

    def run(self):
        """
        :return: list of (suite, passed, seconds, detail)
        """
        results = []
        for name, suite in self.suites():
            begin = timer()
            try:
                passed, detail = suite()
            except Exception as e:
                passed, detail = False, "%s: %s" % (type(e).__name__, e)
            seconds = timer() - begin
            self.run_metrics[name] = seconds
            self.logger.log("%s %s (%s): %.5f secs" % (name, "passed" if passed else "failed", detail, seconds),
                            logging.INFO if passed else logging.ERROR)
            results.append((name, passed, seconds, detail))
        return results

    def null_space(self, trials=200):
        rng = np.random.default_rng(self.seed)
        worst_angle = 0.0
        for _ in range(trials):
            n = int(rng.integers(3, 9))
            L = gng_laplacian(path_laplacian(rng.uniform(0.1, 2.0, size=n - 2)), grad_op(n))
            values, vectors = spectrum(L, n)
            if null_space_dim(values) != 2 or values[2] <= 1e-6:
                return False, "n=%d eigenvalues %s" % (n, np.array2string(values[:3], precision=3))
            basis = np.stack([np.ones(n), np.arange(n, dtype=float)], axis=1)
            worst_angle = max(worst_angle, subspace_angle(vectors[:, :2], basis))
        return worst_angle < 1e-6, "max angle %.2e rad" % worst_angle

    def psd(self, trials=100):
        rng = np.random.default_rng(self.seed + 1)
        config = AdmmConfig(family=AUX4)
        lowest = np.inf
        for _ in range(trials):
            side = int(rng.integers(4, 7))
            prior = build_prior(Patch(rng.uniform(size=side * side)), keep_components=True)
            operators = [prior.L_inline, prior.L_cross]
            for L, weight, rho in split_blocks(prior, config):
                operators.append(np.eye(prior.dim) + (2.0 * weight / rho) * L.toarray())
            for op in operators:
                dense = op.toarray() if hasattr(op, 'toarray') else op
                lowest = min(lowest, float(np.linalg.eigvalsh(dense)[0]))
        return lowest >= PSD_TOLERANCE, "min eigenvalue %.2e" % lowest

    def solver_equivalence(self, instances=20, side=6, layers=200):
        rng = np.random.default_rng(self.seed + 2)
        n2 = side * side
        builder = PriorBuilder(kernel=KernelParams(sigma_f=2.0, sigma_x=2.0, sigma_a=2.0), keep_components=True)
        config = AdmmConfig(outer_layers=layers, cg_iters=n2, cg_tol=1e-12, relearn_graphs=False)
        worst = 0.0
        for name in ['identity', 'mask', 'blur']:
            for _ in range(instances):
                if name == 'identity':
                    model = Identity((side, side))
                elif name == 'mask':
                    model = Mask(make_mask(n2, 0.5, int(rng.integers(1 << 31))).reshape(side, side))
                else:
                    model = Blur(make_gaussian_kernel(3, 1.0), (side, side))
                x = rng.uniform(size=n2)
                y = model.apply(x) + 0.01 * rng.standard_normal(model.observed_size)
                prior = builder.build(model.initial_estimate(y), keep_components=True)
                reference = direct_solve(prior, model, y, tol=1e-12)
                for family in [AUX1, AUX2, AUX4]:
                    result = solve(y, model, prior, config.copy(family=family))
                    error = np.linalg.norm(result - reference) / np.linalg.norm(reference)
                    worst = max(worst, error)
        return worst <= 1e-4, "max relative error %.2e" % worst

    def cg_oracle(self, systems=50):
        rng = np.random.default_rng(self.seed + 3)
        worst = 0.0
        for n in np.linspace(5, 200, systems).astype(int):
            Q = rng.standard_normal((n, n))
            M = Q.T @ Q / n + np.eye(n)
            b = rng.standard_normal(n)
            x, _ = cg_solve(M, b, iters=n, tol=1e-12)
            oracle = linalg.solve(M, b, assume_a='pos')
            worst = max(worst, np.linalg.norm(x - oracle) / np.linalg.norm(oracle))

        diag = 3.0 * np.eye(8)
        b = rng.standard_normal(8)
        x, info = cg_solve(diag, b, iters=8, tol=1e-12)
        one_step = info['niter'] == 1 and np.allclose(x, b / 3.0, rtol=0, atol=1e-14)
        return worst <= 1e-8 and one_step, "max relative error %.2e, diagonal in %d step(s)" % (worst, info['niter'])

    def planar_recovery(self, side=36):
        clean = Image(planar_image(side))
        keep = make_mask(side * side, 0.5, self.seed).reshape(side, side)
        observed = Image(clean.data * keep)
        config = AdmmConfig(family=AUX4, outer_layers=200, cg_iters=30, relearn_graphs=False)
        _, rep = restore(observed, 'interpolate', Mask(keep), config, PriorBuilder(), patch_size=side,
                         reference=clean, logger=report.Logger("Planar recovery", active=False))
        return rep.max_abs_error < 1e-3, "max abs error %.2e" % rep.max_abs_error

    def counterexample(self):
        x = COUNTEREXAMPLE.ravel()
        prior = build_prior(Patch(x), params=KernelParams(sigma_f=1.0, sigma_x=1.0, sigma_a=1.0))
        inline = glr(prior.L_inline, x)
        cross = glr(prior.L_cross, x)
        dense_cross = float(x @ prior.L_cross.toarray() @ x)
        passed = inline <= 1e-12 and cross >= 1e-6 and abs(cross - dense_cross) <= 1e-12
        return passed, "inline %.2e, cross %.4f" % (inline, cross)

    def tse_decay(self, graphs=20, nodes=10):
        rng = np.random.default_rng(self.seed + 4)
        worst = 0.0
        for _ in range(graphs):
            L_rw = random_walk_laplacian(laplacian(line_graph(rng.uniform(0.1, 1.0, size=nodes - 1)))).toarray()

            def error(mu):
                return np.linalg.norm(tse_filter(L_rw, mu) - np.linalg.inv(np.eye(nodes) + mu * L_rw), 2)

            for mu in [0.2, 0.1]:
                worst = max(worst, error(mu / 2) / error(mu))
        return worst <= 0.35, "max error ratio %.3f" % worst

    def round_trips(self):
        rng = np.random.default_rng(self.seed + 5)
        image = Image(rng.integers(0, 256, size=(3, 70, 70)) / 255.0)
        rebuilt = aggregate(patchify(image, 36, 32), image.width, image.height)
        patches_exact = np.array_equal(rebuilt.data, image.data)

        pnm_exact = np.array_equal(decode_pnm(encode_pnm(image.data)), image.data)

        noise = NoiseSpec(25, seed=7)
        seeded = np.array_equal(add_awgn(image.data, noise), add_awgn(image.data, noise)) and \
            np.array_equal(make_mask(100, 0.3, 7), make_mask(100, 0.3, 7))

        passed = patches_exact and pnm_exact and seeded
        return passed, "patches %s, pnm %s, seeded %s" % (patches_exact, pnm_exact, seeded)

    def denoise_benchmark(self, size=128, sigma=25.0, train_size=64, grid=None):
        """
        Tunes mu and mu_tilde on a small training image for each auxiliary split, then denoises a piecewise
        planar image with the GGLR prior under that split and with the GLR baseline
        :param size: side of the test image
        :param sigma: AWGN level on the 0..255 scale
        :param train_size: side of the training image
        :param grid: candidate values of mu and mu_tilde
        """
        clean = Image(make_piecewise_planar(size, self.seed))
        noisy = Image(add_awgn(clean.data, NoiseSpec(sigma, self.seed)))
        train_clean = Image(make_piecewise_planar(train_size, self.seed + 100))
        train = [(train_clean, Image(add_awgn(train_clean.data, NoiseSpec(sigma, self.seed + 100))))]
        model = Identity(clean.shape)
        grid = [0.25, 0.5, 1.0, 2.0] if grid is None else list(grid)
        quiet = report.Logger("Benchmark tuning", active=False)

        noisy_psnr = report.psnr(noisy, clean)
        scores = {}
        for prior_kind, space in [('gglr', {'mu': grid, 'mu_tilde': grid}), ('glr', {'mu': grid})]:
            families = [AUX1, AUX2, AUX4] if prior_kind == 'gglr' else [AUX1]
            for family in families:
                config = AdmmConfig(family=family)
                params, _, _ = tune_params(train, Identity(train_clean.shape), config, space,
                                           builder=PriorBuilder(kind=prior_kind), n_jobs=self.n_jobs, logger=quiet)
                tuned = PriorBuilder(kind=prior_kind, mu=params['mu'], mu_tilde=params['mu_tilde'])
                restored, _ = restore(noisy, 'denoise', model, config, tuned, n_jobs=self.n_jobs, logger=quiet)
                scores["%s_%s" % (prior_kind, family)] = report.psnr(restored, clean)

        self.benchmark = dict(scores, noisy=noisy_psnr)
        self.logger.log("Aux ordering: aux1 %.3f dB, aux2 %.3f dB, aux4 %.3f dB"
                        % (scores['gglr_aux1'], scores['gglr_aux2'], scores['gglr_aux4']), logging.INFO)

        gain = scores['gglr_aux1'] - noisy_psnr
        passed = gain >= 3.0 and scores['gglr_aux1'] >= scores['glr_aux1']
        return passed, "gain %.2f dB, GGLR %.2f dB, GLR %.2f dB" % (gain, scores['gglr_aux1'], scores['glr_aux1'])
