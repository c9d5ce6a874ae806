"""groupcs: group-sparse compressed sensing with certified restricted
isometries, decomposable-norm recovery bounds, and a constrained-norm
solver."""

from .groups import (
    DecompositionStalled,
    EnumerationTooLarge,
    GksFamily,
    GroupPartition,
    complement,
    enumerate_gks,
    is_group_k_sparse,
    load_partition,
    optimal_decomposition,
    restrict,
    save_partition,
    sparsity_index,
    support_of,
)
from .norms import (
    DecomposabilityReport,
    GroupL2Norm,
    L1Norm,
    NormPairConstants,
    NotTestable,
    SortedL1Norm,
    SparseGroupNorm,
    TreeNorm,
    UnsupportedNorm,
    UnsupportedPair,
    check_decomposability,
    dual_norm,
    eval_norm,
    gamma_of,
    load_tree,
    load_weights,
    pair_constants,
    parse_norm_spec,
    prox,
)
from .sensing import (
    CrossCorrelationReport,
    GripCertificate,
    MeasurementMatrix,
    certify_grip,
    check_cross_correlation,
    gen_bernoulli,
    gen_gaussian,
    load_matrix,
    save_matrix,
)
from .bounds import (
    BoundCheck,
    BoundReport,
    NotCompressible,
    RipConstants,
    double_block_bound,
    evaluate_bounds,
    single_block_bound,
    symmetric_rip_constants,
    verify_recovery_bound,
)
from .solver import RecoveryResult, SolveOptions, operator_norm, project_ball, solve
from .samplesize import (
    SampleSizePlan,
    SampleSizeQuery,
    c0,
    c0_floor,
    exact_count,
    failure_probability,
    log_sauer_bound,
    min_measurements,
    sauer_bound,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    SignalModel,
    TrialRecord,
    draw_signal,
    parse_config,
    run_experiment,
)

__version__ = "0.1.0"
