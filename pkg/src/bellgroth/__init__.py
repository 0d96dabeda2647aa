"""Correlation Bell inequalities, see-saw quantum maxima and Grothendieck-constant lower bounds."""

__version__ = "0.1.0"

from .bell_core import (BellInequality, LocalBoundReport, build_inequality, chsh, export_matrix,
                        import_matrix, local_bound_bruteforce, local_bound_closed, local_bound_kl)
from .certify import DualCertificate, certificate_from_fixed_point, min_eigenvalue_symmetric, symmetric_embedding
from .constructions import (closed_form_symmetric_ratio, det_uniform_offdiag, gram_half_vectors,
                            three_circle_points)
from .polytope import TightnessReport, reduce_inclusion, saturating_strategies, strategy_vector, tightness
from .quantum import (SeesawConfig, SeesawReport, VectorAssignment, critical_visibility, evaluate,
                      expand_reduced, grothendieck_lower_bound, reduced_symmetric_value,
                      seesaw_alternating, seesaw_symmetric)

__all__ = [
    "BellInequality", "LocalBoundReport", "build_inequality", "chsh", "export_matrix", "import_matrix",
    "local_bound_bruteforce", "local_bound_closed", "local_bound_kl",
    "DualCertificate", "certificate_from_fixed_point", "min_eigenvalue_symmetric", "symmetric_embedding",
    "closed_form_symmetric_ratio", "det_uniform_offdiag", "gram_half_vectors", "three_circle_points",
    "TightnessReport", "reduce_inclusion", "saturating_strategies", "strategy_vector", "tightness",
    "SeesawConfig", "SeesawReport", "VectorAssignment", "critical_visibility", "evaluate",
    "expand_reduced", "grothendieck_lower_bound", "reduced_symmetric_value",
    "seesaw_alternating", "seesaw_symmetric",
]
