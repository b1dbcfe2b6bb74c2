"""
Spectral utilities: eigen-decomposition, graph Fourier transform and the truncated Taylor
low-pass filter of the random walk Laplacian
"""
import numpy as np
import scipy.linalg as linalg
import scipy.sparse as sparse

DENSE_EIGEN_CAP = 4096

NULL_TOLERANCE = 1e-9


def _dense(matrix):
    if sparse.issparse(matrix):
        return matrix.toarray()
    return np.asarray(matrix, dtype=float)


def spectrum(L, k, max_dim=DENSE_EIGEN_CAP):
    """
    k smallest eigenpairs of a symmetric matrix using a dense eigensolver
    :param L: symmetric matrix, sparse or dense
    :param k: number of eigenpairs
    :param max_dim: largest dimension accepted by the dense solver
    :return: (eigenvalues ascending, unit eigenvectors as columns)
    """
    dim = L.shape[0]
    if L.shape[0] != L.shape[1]:
        raise ValueError("Spectrum of a non square matrix: %s" % str(L.shape))
    if dim > max_dim:
        raise ValueError("Dimension %d exceeds the dense eigensolver cap of %d" % (dim, max_dim))
    if k < 1 or k > dim:
        raise ValueError("Requested %d eigenpairs from a matrix of dimension %d" % (k, dim))

    values, vectors = linalg.eigh(_dense(L), subset_by_index=[0, k - 1])
    return values, vectors


def gft(L, x):
    """
    Graph Fourier transform V^T x, V the full eigenbasis of L
    """
    x = np.asarray(x, dtype=float).ravel()
    if L.shape[0] != x.shape[0]:
        raise ValueError("Dimension mismatch: operator is %s, signal has %d samples" % (str(L.shape), x.shape[0]))
    _, vectors = spectrum(L, L.shape[0])
    return vectors.T @ x


def null_space_dim(values, tol=NULL_TOLERANCE):
    return int(np.sum(np.abs(np.asarray(values)) < tol))


def subspace_angle(basis_a, basis_b):
    """
    Largest principal angle in radians between the column spans of two matrices
    """
    return float(np.max(linalg.subspace_angles(np.asarray(basis_a), np.asarray(basis_b))))


def null_mode_gain(mu):
    """
    Gain (1 + 2mu) / (1 + mu)^2 of the truncated Taylor filter on the zero frequency
    """
    return (1.0 + 2.0 * mu) / (1.0 + mu) ** 2


def tse_filter(L_rw, mu):
    """
    First order truncated Taylor approximation of (I + mu L_rw)^-1:
    (1 + mu)^-2 ((1 + 2mu) I - mu L_rw)
    :param L_rw: random walk Laplacian
    :param mu: filter strength, mu = 0 gives the identity
    :return: dense filter matrix
    """
    if mu < 0:
        raise ValueError("Filter strength must be >= 0, got %s" % mu)
    dim = L_rw.shape[0]
    return ((1.0 + 2.0 * mu) * np.eye(dim) - mu * _dense(L_rw)) / (1.0 + mu) ** 2


def tse_apply(L_rw, mu, x):
    """
    Applies tse_filter(L_rw, mu) to x without forming the dense matrix
    """
    if mu < 0:
        raise ValueError("Filter strength must be >= 0, got %s" % mu)
    x = np.asarray(x, dtype=float)
    return ((1.0 + 2.0 * mu) * x - mu * (L_rw @ x)) / (1.0 + mu) ** 2


def diffusion_step(L_rw, mu, x):
    """
    Increment x_{t+1} - x_t of one filtering step, read as an anisotropic diffusion update
    """
    return tse_apply(L_rw, mu, x) - np.asarray(x, dtype=float)
