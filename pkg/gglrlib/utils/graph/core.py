"""
Weighted graphs, their Laplacians and the signal-dependent edge kernels used to learn them
"""
from collections import namedtuple

import numpy as np
import scipy.sparse as sparse
from scipy.special import logsumexp

INTENSITY_MODE = 'intensity'
GRADIENT_MODE = 'gradient'

# exponential weights are clipped here so that degrees stay invertible
WEIGHT_FLOOR = 1e-12

Graph = namedtuple('Graph', ['node_count', 'edges'])


class KernelParams(object):
    """
    Bandwidths of the edge weight kernel.
    sigma_f scales feature distances, sigma_x intensity differences between pixels and
    sigma_a differences between gradients.
    """

    def __init__(self, **kwargs):
        self.sigma_f = float(kwargs.get('sigma_f', 0.5))
        self.sigma_x = float(kwargs.get('sigma_x', 0.1))
        self.sigma_a = float(kwargs.get('sigma_a', 0.5))
        self.validate()

    def validate(self):
        for name in ['sigma_f', 'sigma_x', 'sigma_a']:
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError("Kernel parameter %s must be > 0, got %s" % (name, value))
        return True

    def sigma(self, mode):
        if mode == INTENSITY_MODE:
            return self.sigma_x
        if mode == GRADIENT_MODE:
            return self.sigma_a
        raise ValueError("Unknown edge weight mode: %s" % mode)

    def to_dict(self):
        return {
            'sigma_f': self.sigma_f,
            'sigma_x': self.sigma_x,
            'sigma_a': self.sigma_a,
        }


def laplacian(graph):
    """
    Assembles the combinatorial Laplacian diag(W 1) - W of an undirected graph
    :param graph: a Graph whose edges are (i, j, w) triples, each unordered pair stored once
    :return: the Laplacian as a csr matrix
    """
    num_nodes = graph.node_count
    if len(graph.edges) == 0:
        return sparse.csr_matrix((num_nodes, num_nodes))

    edges = np.asarray(graph.edges, dtype=float)
    rows = edges[:, 0].astype(int)
    cols = edges[:, 1].astype(int)
    vals = edges[:, 2]

    if np.any(rows == cols):
        raise ValueError("Graph contains a self loop")

    adjacency = sparse.coo_matrix(
        (np.concatenate([vals, vals]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(num_nodes, num_nodes)
    ).tocsr()
    degree = np.asarray(adjacency.sum(axis=1)).ravel()

    return (sparse.diags(degree) - adjacency).tocsr()


def glr(L, x):
    """
    Graph Laplacian regularizer x^T L x
    :param L: square (sparse or dense) matrix
    :param x: signal with one sample per node
    :return: the quadratic form as a float
    """
    x = np.asarray(x, dtype=float).ravel()
    if L.shape[0] != L.shape[1] or L.shape[0] != x.shape[0]:
        raise ValueError("Dimension mismatch: operator is %s, signal has %d samples" % (str(L.shape), x.shape[0]))
    return float(x @ (L @ x))


def edge_weight(f_i, f_j, s_i, s_j, params, mode=INTENSITY_MODE):
    """
    Signal dependent edge weight exp(-|f_i - f_j|^2 / sigma_f^2 - |s_i - s_j|^2 / sigma^2).
    sigma is sigma_x in intensity mode and sigma_a in gradient mode.
    """
    sigma = params.sigma(mode)
    f_i = np.asarray(f_i, dtype=float)
    f_j = np.asarray(f_j, dtype=float)
    if f_i.shape != f_j.shape:
        raise ValueError("Feature vectors differ in length: %s vs %s" % (str(f_i.shape), str(f_j.shape)))

    exponent = np.sum((f_i - f_j) ** 2) / params.sigma_f ** 2 + (s_i - s_j) ** 2 / sigma ** 2
    return max(float(np.exp(-exponent)), WEIGHT_FLOOR)


def edge_weights(f_i, f_j, s_i, s_j, params, mode=INTENSITY_MODE):
    """
    Vectorized edge_weight over m edges.
    :param f_i: (m, D) features of the first endpoints
    :param f_j: (m, D) features of the second endpoints
    :param s_i: (m,) samples at the first endpoints
    :param s_j: (m,) samples at the second endpoints
    :return: (m,) array of weights in [WEIGHT_FLOOR, 1]
    """
    sigma = params.sigma(mode)
    feature_dist = np.sum((np.asarray(f_i) - np.asarray(f_j)) ** 2, axis=-1)
    sample_dist = (np.asarray(s_i) - np.asarray(s_j)) ** 2
    weights = np.exp(-feature_dist / params.sigma_f ** 2 - sample_dist / sigma ** 2)
    return np.maximum(weights, WEIGHT_FLOOR)


def normalized_weights(distances):
    """
    Softmax over negative squared feature distances from one node to its neighbours
    :param distances: squared distances, one per neighbour
    :return: positive weights summing to one
    """
    distances = np.asarray(distances, dtype=float).ravel()
    if distances.size == 0:
        raise ValueError("Cannot normalize the weights of a node without neighbours")
    if not np.all(np.isfinite(distances)):
        raise ValueError("Feature distances must be finite")

    # logsumexp shifts by the largest exponent, i.e. the smallest distance
    return np.exp(-distances - logsumexp(-distances))


def random_walk_laplacian(Lbar):
    """
    Random walk Laplacian D^-1 Lbar with D the diagonal of Lbar.
    Rows of zero degree nodes are left at zero, so such nodes add nothing to a prior built on it.
    """
    Lbar = sparse.csr_matrix(Lbar)
    degree = Lbar.diagonal()
    inv_degree = np.zeros_like(degree)
    connected = degree > 0
    inv_degree[connected] = 1.0 / degree[connected]

    return (sparse.diags(inv_degree) @ Lbar).tocsr()


def line_graph(weights):
    """
    Path graph 0 - 1 - ... - m where edge (i, i+1) carries weights[i]
    """
    weights = np.asarray(weights, dtype=float).ravel()
    edges = [(idx, idx + 1, weights[idx]) for idx in range(weights.shape[0])]
    return Graph(weights.shape[0] + 1, edges)


def path_laplacian(weights):
    """
    Laplacian of line_graph(weights) built directly as a tridiagonal matrix
    """
    weights = np.asarray(weights, dtype=float).ravel()
    degree = np.zeros(weights.shape[0] + 1)
    degree[:-1] += weights
    degree[1:] += weights
    return sparse.diags([-weights, degree, -weights], [-1, 0, 1], format='csr')
