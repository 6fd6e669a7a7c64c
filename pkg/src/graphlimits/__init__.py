"""Homomorphism densities, jumble norms, weak regularity and multigraph moments for decorated graph limits."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DecorationSpace,
    MomentSeq,
    Multigraph,
    Partition,
    StepGraphon,
    StepKernel,
    TargetGraph,
    TestGraph,
    WeightFunction,
    change_basis,
    change_target_basis,
    encode_target_multigraph,
    encode_test_multigraph,
    threshold_space,
    truncate_multigraph,
)
from .density import (  # noqa: E402
    DensityReport,
    hom_decorated,
    node_edge_hom_count,
    node_hom_count,
    t_density,
    t_graphon,
    t_inj_density,
    t_moment,
    t_monte_carlo,
    t_step,
)
from .errors import CapExceededError, FalsificationError, GraphLimitsError, ValidationError  # noqa: E402
from .multigraph import (  # noqa: E402
    ConvergenceDiagnosis,
    build_weight_function,
    diagnose_convergence,
    edge_multiplicity_distribution,
    moment_matched_pair,
    rho_smooth_check,
)
from .norms import NormResult, check_bilinear_bound, check_counting_bounds, cut_norm, jumble_norm, k_functional, lp_norm  # noqa: E402
from .regularity import Decomposition, fk_decompose, multi_weak_regularity, stepping, weak_regularity_partition  # noqa: E402
from .sampling import ExperimentTable, randomize_multiplicities, run_convergence_experiment, sample_w_random  # noqa: E402
