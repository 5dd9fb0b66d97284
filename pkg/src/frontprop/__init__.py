"""Asymmetric (Randers) fast-marching fronts propagation for image segmentation."""

from .grid import (Grid2D, ScalarField, SpdTensorField, VectorField2,
                   central_gradient, spd_inverse, spd_norm)
from .features import (GvfParams, GvfResult, ImageBuffer, edge_saliency,
                       gaussian_smooth, gvf, unit_vector_field)
from .metric import (CostParams, MODE_FB, MODE_TUBE, RandersMetricField,
                     anisotropy_ratio, build_omega, build_tensor,
                     build_tubular_tensor, control_set, cost_functions,
                     eval_metric, eval_metric_grid, positivity_check,
                     static_potential)
from .fmm import (FmmConfig, FrontState, SeedSets, StencilFan,
                  fixed_point_repair, hopf_lax_update, run_fast_marching,
                  simplex_minimize, voronoi_index_update)
from .pipeline import SegmentationResult, extract_contours, region_iou, segment_fb, segment_tube

__version__ = "0.1.0"
