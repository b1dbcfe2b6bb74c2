from .operators import grad_op, interleave_grad_op, row_selector, col_selector, col_pair_selector, \
    row_pair_selector, gng_laplacian, line_pixels
from .features import FeatureConfig, FeatureField, compute_features, luminance
from .gng import Patch, GngPrior, PriorBuilder, build_prior, build_glr_prior, glr_as_prior, gglr, \
    line_gradient_laplacian

__all__ = ['grad_op', 'interleave_grad_op', 'row_selector', 'col_selector', 'col_pair_selector',
           'row_pair_selector', 'gng_laplacian', 'line_pixels', 'FeatureConfig', 'FeatureField', 'compute_features',
           'luminance', 'Patch', 'GngPrior', 'PriorBuilder', 'build_prior', 'build_glr_prior', 'glr_as_prior', 'gglr',
           'line_gradient_laplacian']
