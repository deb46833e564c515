"""Exact computations with quivers with potentials on triangulated surfaces.

The package works over the rationals in a truncated complete path algebra:
every element is a finite sum of paths of length at most a chosen degree D,
with exact Fraction coefficients.  On top of that sit the surface
constructions (triangulations, their quivers, the f and g permutations,
the weighted puncture-cycle potentials), right-equivalences given by
unitriangular substitutions, mutation of quivers with potentials, and
certified dimension counts for the truncated Jacobian quotient.
"""

from .endo import REndomorphism, compose, invert_unitriangular, limit_compose
from .jacobian import (
    TruncatedQuotient,
    g_path_independence_check,
    jacobian_generators,
    quotient_dimension,
)
from .normalize import (
    SplitPotential,
    WData,
    absorb_cycle,
    absorb_g_powers,
    decompose_g_powers,
    g_normal_form,
    lengthen,
    normalize_triangle_coefficients,
    split,
    zeta_step,
)
from .path_algebra import (
    Arrow,
    Path,
    Potential,
    Quiver,
    TruncatedElement,
    canonicalize_rotation,
    concat,
    cyclic_derivative,
    enumerate_cycle_classes,
    is_cyclically_equivalent,
    multiply,
)
from .qp_mutation import (
    QP,
    FlipReport,
    MutationWitness,
    ReductionWitness,
    is_two_acyclic,
    mutate,
    premutate,
    reduce,
    verify_flip_compatibility,
)
from .surface import (
    CycleClass,
    PunctureData,
    Triangulation,
    TriangulationQuiver,
    build_quiver,
    check_conditions,
    classify_cycle,
    default_degree,
    f_path,
    fg_witness_cycle,
    flip,
    g_path,
    once_punctured_torus,
    potential_S,
    potential_Sxn,
    potential_T,
    twice_punctured_genus,
)

__all__ = [
    "Arrow",
    "CycleClass",
    "FlipReport",
    "MutationWitness",
    "Path",
    "Potential",
    "PunctureData",
    "QP",
    "Quiver",
    "REndomorphism",
    "ReductionWitness",
    "SplitPotential",
    "Triangulation",
    "TriangulationQuiver",
    "TruncatedElement",
    "TruncatedQuotient",
    "WData",
    "absorb_cycle",
    "absorb_g_powers",
    "build_quiver",
    "canonicalize_rotation",
    "check_conditions",
    "classify_cycle",
    "compose",
    "concat",
    "cyclic_derivative",
    "decompose_g_powers",
    "default_degree",
    "enumerate_cycle_classes",
    "f_path",
    "fg_witness_cycle",
    "flip",
    "g_normal_form",
    "g_path",
    "g_path_independence_check",
    "invert_unitriangular",
    "is_cyclically_equivalent",
    "is_two_acyclic",
    "jacobian_generators",
    "lengthen",
    "limit_compose",
    "multiply",
    "mutate",
    "normalize_triangle_coefficients",
    "once_punctured_torus",
    "potential_S",
    "potential_Sxn",
    "potential_T",
    "premutate",
    "quotient_dimension",
    "reduce",
    "split",
    "twice_punctured_genus",
    "verify_flip_compatibility",
    "zeta_step",
]
