"""Sequential edge couplings that embed a random regular graph between two
binomial random graphs, with exact small-instance oracles and a statistical
verification harness.
"""

from .errors import (
    AllZeroProbabilities,
    BudgetExceeded,
    ConfigError,
    EmptySupport,
    GraphSandwichError,
    InfeasibleState,
    InvariantViolation,
    NoFactorExists,
    ZetaOutOfRange,
)
from .graphs import (
    DegreeSequence,
    HostedFactorSpec,
    MultiGraph,
    SimpleGraph,
    all_pairs,
    complement,
    complement_in,
    degree_sequence_of,
    is_subgraph,
    residual_degrees,
    simplify,
    union,
)
from .sampling import (
    Enumerate,
    Rejection,
    RngStream,
    SwitchMcmc,
    derive_trial_stream,
    enumerate_factors,
    gnp,
    poisson_steps,
    uniform_edge,
    uniform_factor,
)
from .edgeprob import (
    EstimatorHandle,
    ShortfallTable,
    complement_edge_prob,
    conditional_edge_prob,
    exact_edge_counts,
    factor_statistics,
    shortfall_table,
)
from .params import (
    ConstraintReport,
    StageParams,
    select_params,
    solve_mean_steps_stage1,
    solve_mean_steps_stage2,
    thinning_stage1,
    thinning_stage2,
    validate_constraints,
)
from .coupling import (
    CouplingConfig,
    CouplingState,
    TripleOutput,
    completion_phase,
    continue_with_fallback,
    coupling_step,
    run_coupling,
    run_first_phase,
)
from .scheme import (
    PipelineConfig,
    SandwichResult,
    StageOneOutput,
    assemble_sandwich,
    complement_target,
    run_sandwich,
    run_stage1,
    run_stage2,
    run_trials,
)
from .verify import (
    ContainmentRates,
    DistributionTestReport,
    EdgeMarginReport,
    EstimatorDeviationReport,
    IndependenceReport,
    containment_rate,
    edge_margin_test,
    estimator_deviation_report,
    exact_distribution_test,
    pairwise_independence_test,
)

__version__ = "0.1.0"
