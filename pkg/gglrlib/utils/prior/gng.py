"""
Assembly of the gradient graph Laplacian priors over a patch.

Every row and column of the patch contributes a GNG Laplacian F^T Lbar F built from a path graph over
its gradients (the inline prior); every pair of adjacent columns and of adjacent rows contributes one
built with the interleaved gradient operator (the cross prior).
"""
import numpy as np
import scipy.sparse as sparse

from ..graph.core import Graph, KernelParams, laplacian, glr, edge_weights, path_laplacian, \
    random_walk_laplacian, GRADIENT_MODE, INTENSITY_MODE
from .features import FeatureConfig, compute_features, luminance
from .operators import ROW, COL, CROSS_COL, CROSS_ROW, LINE_KINDS, line_pixels, line_count, line_grad_op, \
    gng_laplacian

COMBINATORIAL = 'combinatorial'
RANDOM_WALK = 'random_walk'
NORMALIZATIONS = [COMBINATORIAL, RANDOM_WALK]

GGLR_PRIOR = 'gglr'
GLR_PRIOR = 'glr'
PRIOR_KINDS = [GGLR_PRIOR, GLR_PRIOR]


class Patch(object):
    """
    N x N block of pixels, one row-major vector of length N^2 per channel
    """

    def __init__(self, data, side=None):
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data[None, :]
        if data.ndim != 2:
            raise ValueError("Patch data must be (channels, N^2), got shape %s" % str(data.shape))

        num_pixels = data.shape[1]
        if side is None:
            side = int(round(np.sqrt(num_pixels)))
        if side * side != num_pixels:
            raise ValueError("Patch of %d pixels per channel is not %dx%d" % (num_pixels, side, side))

        self.side = side
        self.data = data

    @classmethod
    def from_grid(cls, grid):
        grid = np.asarray(grid, dtype=float)
        if grid.ndim == 2:
            grid = grid[None, :, :]
        if grid.ndim != 3 or grid.shape[1] != grid.shape[2]:
            raise ValueError("Expected a square (channels, N, N) grid, got shape %s" % str(grid.shape))
        return cls(grid.reshape(grid.shape[0], -1), side=grid.shape[1])

    @property
    def channels(self):
        return self.data.shape[0]

    def luminance(self):
        return luminance(self.data)

    def to_grid(self):
        return self.data.reshape(self.channels, self.side, self.side)


class GngPrior(object):
    """
    Aggregate inline and cross Laplacians with their weights.
    component_terms, when kept, maps each line kind to its partial sum.
    kind, kernel, normalization and feature_config record how the Laplacians were learned.
    """

    def __init__(self, L_inline, L_cross, mu=0.5, mu_tilde=0.5, component_terms=None, **kwargs):
        if mu < 0 or mu_tilde < 0:
            raise ValueError("Prior weights must be >= 0, got mu=%s, mu_tilde=%s" % (mu, mu_tilde))
        if L_inline.shape != L_cross.shape:
            raise ValueError("Inline and cross Laplacians differ in shape")
        self.L_inline = L_inline
        self.L_cross = L_cross
        self.mu = mu
        self.mu_tilde = mu_tilde
        self.component_terms = component_terms
        self.kind = kwargs.get('kind', GGLR_PRIOR)
        self.kernel = kwargs.get('kernel', None)
        self.normalization = kwargs.get('normalization', COMBINATORIAL)
        self.feature_config = kwargs.get('feature_config', None)

    @property
    def dim(self):
        return self.L_inline.shape[0]

    @property
    def side(self):
        return int(round(np.sqrt(self.dim)))

    def operator(self):
        return (self.mu * self.L_inline + self.mu_tilde * self.L_cross).tocsr()

    def with_weights(self, mu, mu_tilde):
        return GngPrior(self.L_inline, self.L_cross, mu, mu_tilde, self.component_terms, **self.learned_with())

    def learned_with(self):
        return {'kind': self.kind, 'kernel': self.kernel, 'normalization': self.normalization,
                'feature_config': self.feature_config}


def _node_features(features, pixels, kind):
    # a gradient node takes the feature of its left (or top) pixel
    if kind in [ROW, COL]:
        return features[pixels[:-1]]
    return features[pixels[0::2]]


def line_gradient_laplacian(gradients, node_features, params, normalization=COMBINATORIAL):
    """
    Laplacian over one line of gradients joined as a path graph.
    Under random walk normalization the term is Lt^T Lt with Lt = D^-1 Lbar.
    :param gradients: (m,) gradient values along the line
    :param node_features: (m, D) feature of each gradient node
    :param params: KernelParams
    :param normalization: combinatorial or random_walk
    :return: m x m csr matrix
    """
    weights = edge_weights(node_features[:-1], node_features[1:], gradients[:-1], gradients[1:], params,
                           mode=GRADIENT_MODE)
    Lbar = path_laplacian(weights)
    if normalization == COMBINATORIAL:
        return Lbar
    if normalization == RANDOM_WALK:
        Lt = random_walk_laplacian(Lbar)
        return (Lt.T @ Lt).tocsr()
    raise ValueError("Unknown normalization: %s" % normalization)


def _scatter(terms, num_pixels):
    if len(terms) == 0:
        return sparse.csr_matrix((num_pixels, num_pixels))
    rows = np.concatenate([item[0] for item in terms])
    cols = np.concatenate([item[1] for item in terms])
    vals = np.concatenate([item[2] for item in terms])
    return sparse.coo_matrix((vals, (rows, cols)), shape=(num_pixels, num_pixels)).tocsr()


def build_prior(x_est, features=None, params=None, normalization=COMBINATORIAL, mu=0.5, mu_tilde=0.5,
                keep_components=False, feature_config=None):
    """
    Builds the GGLR prior of a patch from the gradients of an estimate
    :param x_est: Patch the gradients (and default features) are taken from; channels are merged to luminance
    :param features: FeatureField, computed from x_est when None
    :param params: KernelParams, defaults when None
    :param normalization: combinatorial or random_walk
    :param mu: weight of the inline prior
    :param mu_tilde: weight of the cross prior
    :param keep_components: keep the four partial sums for the 4 auxiliary solver
    :param feature_config: FeatureConfig the features were computed with, recorded on the prior
    :return: GngPrior
    """
    side = x_est.side
    if side < 3:
        raise ValueError("GGLR prior needs a patch of side >= 3, got %d" % side)
    if normalization not in NORMALIZATIONS:
        raise ValueError("Unknown normalization: %s" % normalization)
    if params is None:
        params = KernelParams()
    if features is None:
        features = compute_features(x_est, feature_config)
    if features.side != side:
        raise ValueError("Features cover a %dx%d patch, estimate is %dx%d" % (features.side, features.side,
                                                                              side, side))

    samples = x_est.luminance()
    num_pixels = side * side
    components = {}
    for kind in LINE_KINDS:
        Fop = line_grad_op(side, kind)
        terms = []
        for k in range(1, line_count(side, kind) + 1):
            pixels = line_pixels(side, kind, k)
            gradients = Fop @ samples[pixels]
            Lline = line_gradient_laplacian(gradients, _node_features(features.data, pixels, kind), params,
                                            normalization)
            term = gng_laplacian(Lline, Fop).tocoo()
            terms.append((pixels[term.row], pixels[term.col], term.data))
        components[kind] = _scatter(terms, num_pixels)

    L_inline = (components[ROW] + components[COL]).tocsr()
    L_cross = (components[CROSS_COL] + components[CROSS_ROW]).tocsr()

    return GngPrior(L_inline, L_cross, mu, mu_tilde, components if keep_components else None,
                    kernel=params, normalization=normalization, feature_config=feature_config)


def gglr(prior, x):
    """
    mu x^T L x + mu_tilde x^T Lt x, summed over channels when x is (channels, N^2)
    """
    x = np.asarray(x, dtype=float)
    signals = x[None, :] if x.ndim == 1 else x
    if signals.shape[1] != prior.dim:
        raise ValueError("Dimension mismatch: prior over %d pixels, signal has %d" % (prior.dim, signals.shape[1]))

    value = 0.0
    for signal in signals:
        if prior.mu != 0:
            value += prior.mu * glr(prior.L_inline, signal)
        if prior.mu_tilde != 0:
            value += prior.mu_tilde * glr(prior.L_cross, signal)
    return value


def grid_edges(side):
    """
    Endpoints of the horizontal and vertical edges of a 4-connected side x side grid
    :return: ((i_h, j_h), (i_v, j_v)) index arrays
    """
    rows, cols = np.mgrid[0:side, 0:side]
    index = rows * side + cols
    horizontal = (index[:, :-1].ravel(), index[:, 1:].ravel())
    vertical = (index[:-1, :].ravel(), index[1:, :].ravel())
    return horizontal, vertical


def _glr_direction(ends, samples, features, params, num_pixels, normalization):
    i, j = ends
    weights = edge_weights(features[i], features[j], samples[i], samples[j], params, mode=INTENSITY_MODE)
    L = laplacian(Graph(num_pixels, list(zip(i, j, weights))))
    if normalization == RANDOM_WALK:
        Lt = random_walk_laplacian(L)
        return (Lt.T @ Lt).tocsr()
    return L


def glr_laplacians(x_est, features=None, params=None, normalization=COMBINATORIAL):
    """
    Laplacians of the horizontal and vertical edge sets of the 4-connected pixel graph
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError("Unknown normalization: %s" % normalization)
    if params is None:
        params = KernelParams()
    if features is None:
        features = compute_features(x_est)

    samples = x_est.luminance()
    num_pixels = x_est.side * x_est.side
    horizontal, vertical = grid_edges(x_est.side)

    L_h = _glr_direction(horizontal, samples, features.data, params, num_pixels, normalization)
    L_v = _glr_direction(vertical, samples, features.data, params, num_pixels, normalization)
    return L_h, L_v


def build_glr_prior(x_est, features=None, params=None):
    """
    Combinatorial Laplacian of the 4-connected pixel graph with intensity mode weights
    """
    L_h, L_v = glr_laplacians(x_est, features, params)
    return (L_h + L_v).tocsr()


def glr_as_prior(L_h, L_v, mu=0.5, **kwargs):
    """
    Wraps pixel graph Laplacians as a GngPrior with an empty cross part so every solver accepts them.
    Horizontal and vertical edges stand in for the row and column partial sums.
    """
    zero = sparse.csr_matrix(L_h.shape)
    components = {ROW: L_h, COL: L_v, CROSS_COL: zero, CROSS_ROW: zero}
    return GngPrior((L_h + L_v).tocsr(), zero, mu, 0.0, components, kind=GLR_PRIOR,
                    kernel=kwargs.get('kernel', None), normalization=kwargs.get('normalization', COMBINATORIAL),
                    feature_config=kwargs.get('feature_config', None))


class PriorBuilder(object):
    """
    Rebuilds a prior from an estimate; solvers call build() whenever graphs are re-learned
    """

    def __init__(self, **kwargs):
        self.kind = kwargs.get('kind', GGLR_PRIOR)
        self.normalization = kwargs.get('normalization', COMBINATORIAL)
        self.mu = float(kwargs.get('mu', 0.5))
        self.mu_tilde = float(kwargs.get('mu_tilde', 0.5))
        self.kernel = kwargs.get('kernel', None) or KernelParams()
        self.feature_config = kwargs.get('feature_config', None) or FeatureConfig()
        self.keep_components = kwargs.get('keep_components', False)
        self.validate()

    def validate(self):
        if self.kind not in PRIOR_KINDS:
            raise ValueError("Unknown prior: %s" % self.kind)
        if self.normalization not in NORMALIZATIONS:
            raise ValueError("Unknown normalization: %s" % self.normalization)
        if self.mu < 0 or self.mu_tilde < 0:
            raise ValueError("Prior weights must be >= 0, got mu=%s, mu_tilde=%s" % (self.mu, self.mu_tilde))
        return True

    def build(self, estimate, keep_components=None):
        if keep_components is None:
            keep_components = self.keep_components
        patch = estimate if isinstance(estimate, Patch) else Patch(estimate)
        features = compute_features(patch, self.feature_config)

        if self.kind == GLR_PRIOR:
            L_h, L_v = glr_laplacians(patch, features, self.kernel, self.normalization)
            return glr_as_prior(L_h, L_v, self.mu, kernel=self.kernel, normalization=self.normalization,
                                feature_config=self.feature_config)

        return build_prior(patch, features, self.kernel, self.normalization, self.mu, self.mu_tilde,
                           keep_components=keep_components, feature_config=self.feature_config)

    @classmethod
    def from_prior(cls, prior, **kwargs):
        """
        Builder re-learning graphs the way prior was learned, with its weights
        """
        settings = {'mu': prior.mu, 'mu_tilde': prior.mu_tilde}
        settings.update((key, value) for key, value in prior.learned_with().items() if value is not None)
        settings.update(kwargs)
        return cls(**settings)
