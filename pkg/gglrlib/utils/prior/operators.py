"""
Gradient operators and pixel selectors over an N x N patch scanned row by row.
Selector indices k are 1-based: row_selector(n, 1) picks the first row.
"""
from functools import lru_cache

import numpy as np
import scipy.sparse as sparse

ROW = 'row'
COL = 'col'
CROSS_COL = 'cross_col'
CROSS_ROW = 'cross_row'

LINE_KINDS = [ROW, COL, CROSS_COL, CROSS_ROW]


@lru_cache(maxsize=128)
def grad_op(n):
    """
    (n - 1) x n first difference operator with F[i, i] = 1, F[i, i + 1] = -1
    """
    if n < 2:
        raise ValueError("Gradient operator needs at least 2 samples, got %d" % n)
    return sparse.diags([np.ones(n - 1), -np.ones(n - 1)], [0, 1], shape=(n - 1, n), format='csr')


@lru_cache(maxsize=128)
def interleave_grad_op(n):
    """
    n x 2n operator taking the difference of each interleaved pair (x_1 - x_2, x_3 - x_4, ...)
    """
    if n < 1:
        raise ValueError("Interleaved gradient operator needs n >= 1, got %d" % n)
    rows = np.repeat(np.arange(n), 2)
    cols = np.arange(2 * n)
    data = np.tile([1.0, -1.0], n)
    return sparse.coo_matrix((data, (rows, cols)), shape=(n, 2 * n)).tocsr()


def _check_index(k, upper, name):
    if k < 1 or k > upper:
        raise ValueError("%s index %d out of range [1, %d]" % (name, k, upper))


def line_pixels(n, kind, k):
    """
    Pixel indices picked, in order, by the selector of the given kind
    :param n: patch side
    :param kind: one of row, col, cross_col, cross_row
    :param k: 1-based line index
    :return: integer array, one pixel index per selector row
    """
    idx = np.arange(n)
    if kind == ROW:
        _check_index(k, n, "Row")
        return (k - 1) * n + idx
    if kind == COL:
        _check_index(k, n, "Column")
        return idx * n + (k - 1)
    if kind == CROSS_COL:
        _check_index(k, n - 1, "Column pair")
        pixels = np.empty(2 * n, dtype=int)
        pixels[0::2] = idx * n + (k - 1)
        pixels[1::2] = idx * n + k
        return pixels
    if kind == CROSS_ROW:
        _check_index(k, n - 1, "Row pair")
        pixels = np.empty(2 * n, dtype=int)
        pixels[0::2] = (k - 1) * n + idx
        pixels[1::2] = k * n + idx
        return pixels
    raise ValueError("Unknown line kind: %s" % kind)


def line_count(n, kind):
    if kind in [ROW, COL]:
        return n
    return n - 1


def _selector(n, kind, k):
    pixels = line_pixels(n, kind, k)
    rows = np.arange(pixels.shape[0])
    return sparse.coo_matrix((np.ones(pixels.shape[0]), (rows, pixels)), shape=(pixels.shape[0], n * n)).tocsr()


@lru_cache(maxsize=512)
def row_selector(n, k):
    """H_k: n x n^2, extracts row k left to right"""
    return _selector(n, ROW, k)


@lru_cache(maxsize=512)
def col_selector(n, k):
    """G_k: n x n^2, extracts column k top to bottom"""
    return _selector(n, COL, k)


@lru_cache(maxsize=512)
def col_pair_selector(n, k):
    """J_k: 2n x n^2, interleaves columns k and k + 1 row by row"""
    return _selector(n, CROSS_COL, k)


@lru_cache(maxsize=512)
def row_pair_selector(n, k):
    """K_k: 2n x n^2, interleaves rows k and k + 1 column by column"""
    return _selector(n, CROSS_ROW, k)


def line_grad_op(n, kind):
    """
    Gradient operator acting on the output of a selector of the given kind
    """
    if kind in [ROW, COL]:
        return grad_op(n)
    return interleave_grad_op(n)


def gng_laplacian(Lbar, Fop):
    """
    Laplacian F^T Lbar F of the gradient-induced nodal graph
    :param Lbar: Laplacian over gradient nodes
    :param Fop: operator mapping samples to gradients
    :return: csr matrix over samples
    """
    if Lbar.shape[0] != Lbar.shape[1] or Fop.shape[0] != Lbar.shape[0]:
        raise ValueError("Gradient Laplacian %s is incompatible with operator %s" % (str(Lbar.shape), str(Fop.shape)))
    Fop = sparse.csr_matrix(Fop)
    return (Fop.T @ sparse.csr_matrix(Lbar) @ Fop).tocsr()
