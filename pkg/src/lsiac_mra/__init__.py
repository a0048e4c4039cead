"""Line-SIAC multi-resolution enhancement of modal fields on uniform periodic meshes."""

from .kernel import SiacKernel, bspline_eval, kernel_coefficients, siac_kernel
from .line_filter import FilterGeometry, filter_point, mra_kernel
from .mesh_basis import ModalField, NonFiniteError, UniformMesh, eval_field
from .mra import WaveletDecomposition, build_multiwavelets, decompose, enhanced_details, reconstruct
from .projection import coarsen_by_projection, project_function, refine_by_projection
from .refine import build_transition_stencil, enhance, refine_once

__all__ = [
    "FilterGeometry",
    "ModalField",
    "NonFiniteError",
    "SiacKernel",
    "UniformMesh",
    "WaveletDecomposition",
    "bspline_eval",
    "build_multiwavelets",
    "build_transition_stencil",
    "coarsen_by_projection",
    "decompose",
    "enhance",
    "enhanced_details",
    "eval_field",
    "filter_point",
    "kernel_coefficients",
    "mra_kernel",
    "project_function",
    "reconstruct",
    "refine_by_projection",
    "refine_once",
    "siac_kernel",
]
