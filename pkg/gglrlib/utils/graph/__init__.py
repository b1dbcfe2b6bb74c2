from .core import Graph, KernelParams, laplacian, glr, edge_weight, edge_weights, normalized_weights, \
    random_walk_laplacian, line_graph, path_laplacian, INTENSITY_MODE, GRADIENT_MODE, WEIGHT_FLOOR
from .spectral import spectrum, gft, tse_filter, tse_apply, diffusion_step, null_space_dim, subspace_angle, \
    null_mode_gain

__all__ = ['Graph', 'KernelParams', 'laplacian', 'glr', 'edge_weight', 'edge_weights', 'normalized_weights',
           'random_walk_laplacian', 'line_graph', 'path_laplacian', 'spectrum', 'gft', 'tse_filter', 'tse_apply',
           'diffusion_step', 'null_space_dim', 'subspace_angle', 'null_mode_gain']
