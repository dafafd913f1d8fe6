"""Coordinate-k norms, Capra conjugacy and norm-ratio lower bounds for the l0 pseudonorm."""
from ._backend import BACKEND
from .bounds import BoundReport, dual_phi_norm, holder_ratio_bound, l0_lower_bound, phi_norm
from .conjugacy import (PhiSpec, SubdiffCertificate, biconjugate_levelset_indicator,
                        capra_biconjugate, capra_conjugate, capra_convexity_check,
                        conditional_infimum, coupling, normalize, subdiff_at_zero_contains,
                        subdiff_membership)
from .extreal import NEG_INF, POS_INF, ExtReal, lower_add, upper_add
from .l0core import SupportSet, l0, level_set_contains, project, support
from .norms import (NormSequence, SourceNorm, coordinate_norm, dual_coordinate_norm, dual_norm,
                    k_star_norm, norm_sequence, restriction_norm, source_norm,
                    sparsity_from_grading)
from .solver import NonConvergenceError, SolverConfig, SolverError

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundReport", "ExtReal", "NEG_INF", "NonConvergenceError", "NormSequence",
    "POS_INF", "PhiSpec", "SolverConfig", "SolverError", "SourceNorm", "SubdiffCertificate",
    "SupportSet", "biconjugate_levelset_indicator", "capra_biconjugate", "capra_conjugate",
    "capra_convexity_check", "conditional_infimum", "coordinate_norm", "coupling",
    "dual_coordinate_norm", "dual_norm", "dual_phi_norm", "holder_ratio_bound", "k_star_norm",
    "l0", "l0_lower_bound", "level_set_contains", "lower_add", "norm_sequence", "normalize",
    "phi_norm", "project", "restriction_norm", "source_norm", "sparsity_from_grading",
    "subdiff_at_zero_contains", "subdiff_membership", "support", "upper_add",
]
