"""SE(3)-equivariant point-cloud convolutions on Wigner coefficient fields."""

from .activation import RotationDomainSignal, forward_wt, inverse_wt, relu_activation
from .clebsch_gordan import cg_scalar, cg_tensor_complex, cg_tensor_real, project_composite
from .config import Tolerances, get_tolerances, set_tolerances
from .conv import (SE3Weights, TFNWeights, iota, iota_inv, r3_component, r3_layer, se3_conv_layer,
                   so3_component, so3_layer, tfn_layer)
from .errors import Se3ConvError
from .fields import FeatureField
from .harmonics import (EulerZYZ, eval_real_spherical_harmonics, euler_from_rotation, random_rotation,
                        rotation_from_euler, transition_matrix, wigner_D_real, wigner_small_d)
from .kernels import KernelBasisSpec, eval_kernel, zernike_radial
from .sampling import RotationSampleSet, exact_euler_grid, fps_rotations, icosahedral_group

__all__ = [
    "RotationDomainSignal", "forward_wt", "inverse_wt", "relu_activation",
    "cg_scalar", "cg_tensor_complex", "cg_tensor_real", "project_composite",
    "Tolerances", "get_tolerances", "set_tolerances",
    "SE3Weights", "TFNWeights", "iota", "iota_inv", "r3_component", "r3_layer", "se3_conv_layer",
    "so3_component", "so3_layer", "tfn_layer",
    "Se3ConvError", "FeatureField",
    "EulerZYZ", "eval_real_spherical_harmonics", "euler_from_rotation", "random_rotation",
    "rotation_from_euler", "transition_matrix", "wigner_D_real", "wigner_small_d",
    "KernelBasisSpec", "eval_kernel", "zernike_radial",
    "RotationSampleSet", "exact_euler_grid", "fps_rotations", "icosahedral_group",
]
