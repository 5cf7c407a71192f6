"""Substitution-closed permutation classes encoded as forests of decorated plane trees."""
from .analytic import (ClassSpec, OffspringModel, SeriesTable, brownian_marginal,
                       build_offspring_model, compute_counting_series, criticality_classify,
                       estimate_radius, scaling_parameter, solve_kappa)
from .errors import (ClassMembershipError, CriticalityError, InsufficientRealizationError,
                     InvalidInputError, NeedsLargerCutoffError, ResourceLimitError, RetryLimitError)
from .kernels import BACKEND
from .limit_trees import PointedPackedTree, sample_limit_pointed_tree, sample_limit_skeleton_tree
from .local import (RootedPermutation, perm_local_distance, realize_rooted_permutation,
                    restrict_rooted, tree_local_distance)
from .perm import (Permutation, count_consecutive, count_occurrences, density, is_simple,
                   pattern_at, simple_permutations)
from .sampler import ClassSampler, SamplerConfig, sample_uniform_class_perm
from .skeleton import SkeletonView, expand_skeleton, extract_skeleton, reduced_tree
from .textio import forest_to_text, parse_canonical, parse_forest, parse_packed, tree_to_text
from .trees import (STAR, CanonicalTree, DecoratedForest, Gadget, PackedTree, PlaneTree,
                    canonical_tree, class_membership, decode_packed, eval_tree, forest_decode,
                    forest_encode, pack, read_forest_pattern, read_pattern,
                    substitution_decompose, unpack)

__version__ = "0.1.0"
