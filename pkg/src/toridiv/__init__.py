"""Exact toric divisor computations: sections, global generation, q-nefness and asymptotic pullbacks."""

from .errors import DomainError, InternalInconsistencyError, PreconditionError, ToriDivError, UsageError
from .fan import Fan, is_complete, locate, refine_by_polytope, is_refinement_small, validate_fan
from .divisor import (
    ToricDivisor,
    cartier_status,
    global_sections,
    is_globally_generated,
    local_generators,
    polytope_PD,
    section_hilbert_function,
)
from .qnef import check_gg_conjecture, is_nef_qcartier, is_qnef, qcartierize, qd_polytope, qnt
from .mld import acc_family, boundary_inf_valuation, dfh_pullback, finite_level_valuation, mld_search, relative_canonical

__version__ = "0.1.0"
