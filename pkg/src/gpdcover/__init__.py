"""
Covering morphisms of groupoids, derived modules and the 1-dimensional
relative Hurewicz comparison, computed exactly over the integers.

Modules: ``zlin`` (integer linear algebra), ``gpd`` (groupoids),
``cover`` (coverings and finite groups), ``derived`` (derived modules and the
Crowell sequence), ``cube`` (cubical sets and homology), ``cli``.
"""

from .verdict import Verdict
from .zlin import (IntMatrix, FPAbelianGroup, AbelianMap, smith_normal_form, hnf,
                   check_exactness, direct_sum)
from .gpd import (ExplicitGroupoid, PresentedGroupoid, GroupPresentation, Relation, validate,
                  spanning_forest, vertex_group, universal_group, totab, components, costar)
from .cover import (FinGroup, GroupMorphismToFin, GroupoidMorphism, GroupoidAction,
                    is_covering, is_fibration, lift_sequence, action_groupoid,
                    cover_from_subgroup, universal_cover_of_group, pullback_groupoid)
from .derived import (GModulePresentation, Derivation, derived_module, augmentation_ideal,
                      crowell_sequence, verify_theorem41)
from .cube import (CubicalSet, Degenerate, VertexSubset, validate_cubical_set, boundary_matrix,
                   homology, relative_homology, rel0_homology, pi1_presentation,
                   hurewicz_compare, build_covering_complex, verify_theorem55, models)

__version__ = "0.1.0"
