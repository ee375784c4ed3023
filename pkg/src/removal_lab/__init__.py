"""Exact triangle counting and removal-lemma experiments over F_p^n."""
from .constructions import (
    Blowup,
    family_curve,
    family_exponent,
    lift_invariants,
    lift_plus_two,
    product_blowup,
    random_matched,
    tensor_power_matched,
    tensor_power_system,
    tensor_product_matched,
)
from .errors import (
    BudgetExhausted,
    CapacityError,
    InvariantError,
    ParseError,
    RemovalLabError,
    ValidationError,
)
from .exponents import (
    build_prune_schedule,
    closed_form,
    delta_lower_bound,
    objective_h,
    solve_exponent,
    sumfree_size_bound,
)
from .formats import parse_instance, read_instance, write_instance
from .fpn import GroupParams, PointSet, SubspaceBasis, add_points, enumerate_subspace, sample_subspace
from .oracle import OracleBudget, max_matched_exact, min_deletion_exact, removal_bound_audit
from .procedures import greedy_disjoint, prune_high_degree, subspace_experiment
from .triangles import (
    MatchedTriples,
    Triangle,
    TripleSystem,
    count,
    count_naive,
    count_transform,
    degree_profile,
    list_triangles,
    verify_matching,
)

__version__ = "0.1.0"
