"""Two-stage pipeline that embeds a random regular graph between two
binomial random graphs.

Stage 1 runs the per-step coupling towards a d-regular target without the
completion, leaving a partial graph and a per-vertex deficit.  Stage 2
reruns the coupling on the pairs outside the partial graph, steering
towards the complementary constant target, with completion.  Taking
complements and unions then assembles the sandwich: a lower binomial
graph, an exactly d-regular middle graph, and an upper binomial graph
that is the union of two independent binomial graphs.

Randomness layout per trial: the trial stream is derived purely from
(master seed, trial index); stage 1 consumes child 1 and stage 2 child 2,
so stage 2 can be replayed bit-identically against a perturbed stage-1
outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .coupling import CouplingConfig, TripleOutput, run_coupling
from .edgeprob import EstimatorHandle
from .errors import InvariantViolation
from .graphs import (
    DegreeSequence,
    SimpleGraph,
    complement,
    complement_in,
    degree_sequence_of,
    is_subgraph,
    residual_degrees,
    union,
)
from .params import (
    pair_count,
    solve_mean_steps_stage1,
    solve_mean_steps_stage2,
    thinning_stage1,
    thinning_stage2,
)
from .sampling import FactorSampleMethod, RngStream, derive_trial_stream


@dataclass
class PipelineConfig:
    """Execution knobs for the two-stage pipeline.

    Defaults are desk-scale: they keep both thinning probabilities inside
    (0, 1) at small n, where the asymptotic recipes do not.  A ``None``
    stage-2 thinning means "recompute from the realised deficit after
    stage 1" (safety2 * max_deficit / (slack2 * n)), which can land
    outside (0, 1) and then fails loudly.
    """

    slack1: float = 0.2
    safety1: float = 2.0
    thinning1: float | None = None
    mean_steps1: float | None = None
    fixed_steps1: int | None = None
    slack2: float = 0.5
    safety2: float = 2.0
    thinning2: float | None = 0.3
    mean_steps2: float | None = None
    fixed_steps2: int | None = None
    estimator: EstimatorHandle = field(default_factory=EstimatorHandle.exact)
    fallback_method: FactorSampleMethod | None = None
    debug_asserts: bool = False

    def resolved_thinning1(self) -> float:
        if self.thinning1 is not None:
            return self.thinning1
        return thinning_stage1(self.slack1, self.safety1)

    def resolved_mean_steps1(self, n: int, d: int) -> float:
        if self.mean_steps1 is not None:
            return self.mean_steps1
        return solve_mean_steps_stage1(n, d, self.slack1)

    def resolved_mean_steps2(self, n: int) -> float:
        if self.mean_steps2 is not None:
            return self.mean_steps2
        return solve_mean_steps_stage2(n, self.slack2)


@dataclass
class StageOneOutput:
    """Stage-1 triple plus the per-vertex deficit it leaves behind."""

    lower: SimpleGraph
    partial: SimpleGraph
    upper: SimpleGraph
    deficit: DegreeSequence
    via_fallback: bool
    max_shortfall: float
    shortfall_breaches: int
    lower_density: float
    upper_density: float
    steps_run: int


@dataclass
class SandwichResult:
    """Final sandwich triple with containment flags and run statistics."""

    lower: SimpleGraph
    middle: SimpleGraph
    upper: SimpleGraph
    contains_lower: bool
    contains_upper: bool
    any_fallback: bool
    stage1: StageOneOutput
    stage2: TripleOutput
    deficit_max: int
    deficit_spread: int
    deficit_spread_ok: bool
    lower_target_density: float
    upper_target_density: float
    upper_density1: float
    upper_density2: float
    thinning2_used: float
    trial_index: int = 0


def run_stage1(n: int, d: int, cfg: PipelineConfig, rng: RngStream) -> StageOneOutput:
    """Run the per-step coupling towards the d-regular target (no completion)."""
    ccfg = CouplingConfig(
        n=n,
        target=DegreeSequence.constant(n, d),
        thinning=cfg.resolved_thinning1(),
        mean_steps=cfg.resolved_mean_steps1(n, d),
        fixed_steps=cfg.fixed_steps1,
        estimator=cfg.estimator,
        run_completion=False,
        fallback_method=cfg.fallback_method,
        debug_asserts=cfg.debug_asserts,
    )
    out = run_coupling(ccfg, rng)
    deficit = residual_degrees(ccfg.target, out.core)
    npairs = pair_count(n)
    return StageOneOutput(
        lower=out.lower,
        partial=out.core,
        upper=out.upper,
        deficit=deficit,
        via_fallback=out.via_fallback,
        max_shortfall=out.max_shortfall,
        shortfall_breaches=out.shortfall_breaches,
        lower_density=out.lower.edge_count / npairs,
        upper_density=out.upper.edge_count / npairs,
        steps_run=out.steps_run,
    )


def complement_target(
    n: int,
    d: int,
    partial_degrees: DegreeSequence | None = None,
    deficit: DegreeSequence | None = None,
) -> DegreeSequence:
    """The constant stage-2 target (n-1-d per vertex).

    Algebraically ((n-1) - h_v) - (d - h_v) for every vertex v, whatever
    the stage-1 degrees h are; when both are supplied the two computations
    are compared and a mismatch flags an upstream bookkeeping bug.
    """
    if d > n - 1:
        raise ValueError("need d <= n-1")
    direct = DegreeSequence.constant(n, n - 1 - d)
    if partial_degrees is not None and deficit is not None:
        derived = tuple(
            (n - 1 - h) - t for h, t in zip(partial_degrees, deficit)
        )
        if derived != direct.values:
            raise InvariantViolation(
                "stage-2 target differs between its two defining formulas"
            )
    return direct


def run_stage2(
    n: int,
    d: int,
    stage1: StageOneOutput,
    cfg: PipelineConfig,
    rng: RngStream,
) -> tuple[TripleOutput, float]:
    """Rerun the coupling outside the stage-1 partial graph.

    Returns the output triple and the thinning actually used (which may
    have been recomputed from the realised deficit).
    """
    target = complement_target(
        n, d, degree_sequence_of(stage1.partial), stage1.deficit
    )
    if cfg.thinning2 is not None:
        thin2 = cfg.thinning2
    else:
        thin2 = thinning_stage2(
            stage1.deficit.max_value, cfg.slack2, n, cfg.safety2
        )
    ccfg = CouplingConfig(
        n=n,
        target=target,
        thinning=thin2,
        mean_steps=cfg.resolved_mean_steps2(n),
        host_filter=stage1.partial,
        fixed_steps=cfg.fixed_steps2,
        estimator=cfg.estimator,
        run_completion=True,
        fallback_method=cfg.fallback_method,
        debug_asserts=cfg.debug_asserts,
    )
    return run_coupling(ccfg, rng), thin2


def assemble_sandwich(
    n: int,
    stage1: StageOneOutput,
    stage2: TripleOutput,
    mean_steps1: float,
    thinning1: float,
    mean_steps2: float,
    thinning2: float,
    trial_index: int = 0,
) -> SandwichResult:
    """Complement and union the two stages into the final triple.

    middle = partial + (available pairs the stage-2 core left unused); its
    degree sequence is exactly the regular target.  upper = stage-1 upper
    + complement of the stage-2 lower graph.
    """
    hbar = complement(stage1.partial)
    embedded = complement_in(hbar, stage2.core)
    cover = complement(stage2.lower)
    middle = union(stage1.partial, embedded)
    upper = union(stage1.upper, cover)
    contains_lower = is_subgraph(stage1.lower, middle)
    contains_upper = is_subgraph(middle, upper)
    # Complement duality, asserted on every assembly: the embedded leftover
    # sits inside the cover iff the stage-2 lower graph sits inside
    # partial + stage-2 core.
    lhs = is_subgraph(embedded, cover)
    rhs = is_subgraph(stage2.lower, union(stage1.partial, stage2.core))
    if lhs != rhs:
        raise InvariantViolation("complement duality violated in assembly")

    npairs = pair_count(n)
    q1 = 1.0 - math.exp(-mean_steps1 / npairs)
    p1 = 1.0 - math.exp(-mean_steps1 * (1.0 - thinning1) / npairs)
    q2 = math.exp(-mean_steps2 * (1.0 - thinning2) / npairs)
    p = 1.0 - (1.0 - q1) * (1.0 - q2)
    dmax = stage1.deficit.max_value
    spread = stage1.deficit.spread
    return SandwichResult(
        lower=stage1.lower,
        middle=middle,
        upper=upper,
        contains_lower=contains_lower,
        contains_upper=contains_upper,
        any_fallback=stage1.via_fallback or stage2.via_fallback,
        stage1=stage1,
        stage2=stage2,
        deficit_max=dmax,
        deficit_spread=spread,
        deficit_spread_ok=spread <= dmax ** (2.0 / 3.0),
        lower_target_density=p1,
        upper_target_density=p,
        upper_density1=q1,
        upper_density2=q2,
        thinning2_used=thinning2,
        trial_index=trial_index,
    )


def run_sandwich(
    n: int,
    d: int,
    master_seed: int,
    cfg: PipelineConfig | None = None,
    trial_index: int = 0,
) -> SandwichResult:
    """One full trial of the pipeline, reproducible from (seed, index).

    Stage-1 fallback trials are not discarded: stage 2 still runs against
    whatever stage 1 produced, and the result carries the fallback flag so
    downstream rate accounting can condition on it.
    """
    cfg = cfg or PipelineConfig()
    trial = derive_trial_stream(master_seed, trial_index)
    stage1 = run_stage1(n, d, cfg, trial.child(1))
    stage2, thin2 = run_stage2(n, d, stage1, cfg, trial.child(2))
    return assemble_sandwich(
        n,
        stage1,
        stage2,
        cfg.resolved_mean_steps1(n, d),
        cfg.resolved_thinning1(),
        cfg.resolved_mean_steps2(n),
        thin2,
        trial_index=trial_index,
    )


def run_trials(
    n: int,
    d: int,
    master_seed: int,
    trials: int,
    cfg: PipelineConfig | None = None,
) -> list[SandwichResult]:
    return [
        run_sandwich(n, d, master_seed, cfg, trial_index=i) for i in range(trials)
    ]
