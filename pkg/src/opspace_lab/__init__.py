"""Operator-space norms, amplified nonlinear maps, and rigidity experiments."""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .fermion import CarSystem, ResourceError, car_generators, fermi_mn_norm
from .maps import (BallMap, MLinearMap, ModulusCurve, amplify, compression_ss, identity_map,
                   linear_map, mlinear_lip_bound, modulus_ss, polynomial_map, product_map_cc_check,
                   qc_composition_bound, schur_block_product)
from .matcore import DomainError, smallest_singular, spectral_norm
from .rigidity import (CollapseReport, Embedding, RISelection, WitnessReport, collapse_experiment,
                       hadamard, localized_experiment, lower_bound_experiment, midpoint_defect,
                       restricted_invertibility, uncollapsed_experiment, witness_pair)
from .spaces import Kind, MatElem, NormCert, SpaceSpec, dual_space, kappa, mn_norm

__all__ = [
    "BACKEND", "BallMap", "CarSystem", "CollapseReport", "DomainError", "Embedding", "Kind",
    "MLinearMap", "MatElem", "ModulusCurve", "NormCert", "RISelection", "ResourceError",
    "SpaceSpec", "WitnessReport", "amplify", "car_generators", "collapse_experiment",
    "compression_ss", "dual_space", "fermi_mn_norm", "hadamard", "identity_map", "kappa",
    "linear_map", "localized_experiment", "lower_bound_experiment", "midpoint_defect",
    "mlinear_lip_bound", "mn_norm", "modulus_ss", "polynomial_map", "product_map_cc_check",
    "qc_composition_bound", "restricted_invertibility", "schur_block_product", "smallest_singular",
    "spectral_norm", "uncollapsed_experiment", "witness_pair",
]
