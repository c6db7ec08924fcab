"""Exact finite-scale computations with idempotent systems on Bruhat-Tits buildings.

The package covers apartment geometry of type Ã (hulls, convexity,
admissibility, paths), the lattice model of the building of GL_d, consistent
idempotent systems (diagonal and finite group models), the cellular chain and
cochain complexes of the associated cosheaf and sheaf, and traces of
symmetries on them.  All linear algebra is over exact rationals.
"""

from .apartment import AffineRoot, Apartment, ApartmentError, BudgetExceeded, SubComplex
from .building import BuildingComplex, LatticeVertex, ball, canonical_vertex, standard_vertex
from .characters import CharacterReport, HeckeTrace, hecke_trace, lefschetz_sum
from .complexes import (ChainAssembly, OrientedComplex, assemble_chain, assemble_cochain,
                        homology, mayer_vietoris, orient, verify_resolution)
from .idempotents import (FiniteGroupModel, IdempotentSystem, Symmetry, averaging_idempotent,
                          check_group_consistency, check_idempotent_consistency,
                          congruence_subgroup, diagonal_model, group_model, support_projection)
from .linalg import QMatrix
from .report import Check, Report

__all__ = [
    "AffineRoot", "Apartment", "ApartmentError", "BudgetExceeded", "SubComplex",
    "BuildingComplex", "LatticeVertex", "ball", "canonical_vertex", "standard_vertex",
    "CharacterReport", "HeckeTrace", "hecke_trace", "lefschetz_sum",
    "ChainAssembly", "OrientedComplex", "assemble_chain", "assemble_cochain", "homology",
    "mayer_vietoris", "orient", "verify_resolution",
    "FiniteGroupModel", "IdempotentSystem", "Symmetry", "averaging_idempotent",
    "check_group_consistency", "check_idempotent_consistency", "congruence_subgroup",
    "diagonal_model", "group_model", "support_projection",
    "QMatrix", "Check", "Report",
]

__version__ = "0.1.0"
