"""The sequential three-graph edge coupling.

One run grows three graphs on a shared stream of uniformly random vertex
pairs.  Per step, a pair ``e`` and a coin ``a`` are drawn:

* the upper multigraph always receives ``e``;
* the lower multigraph receives ``e`` iff ``a > thinning``;
* the core graph (the one being steered towards the degree target)
  receives ``e`` iff ``e`` is still admissible and ``a >= shortfall(e)``,
  where the shortfall compares P(e in final graph | core so far) against
  the best admissible edge.

Because the lower/upper updates are a fixed function of (pair, coin,
thinning) alone, the pair (lower, upper) is distributed as a thinned /
full Poissonised binomial graph no matter what the core, the host filter
or the estimator do -- and two runs fed the same pair stream produce
bit-identical (lower, upper) even with different host filters.  The pair
stream and the auxiliary stream (fallback resampling, completion draws,
empirical estimators) are therefore kept separate.

If some admissible edge's shortfall exceeds the thinning tolerance the
run abandons the steering: the core is resampled from scratch as a
uniform factor (the fallback), while the remaining steps keep feeding the
lower/upper pair as before.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .edgeprob import (
    EstimatorHandle,
    _edge_probabilities,
    table_from_probabilities,
)
from .errors import EmptySupport, InfeasibleState, InvariantViolation
from .graphs import (
    DegreeSequence,
    Edge,
    HostedFactorSpec,
    MultiGraph,
    SimpleGraph,
    all_pairs,
)
from .sampling import Enumerate, FactorSampleMethod, RngStream, uniform_factor


@dataclass
class CouplingConfig:
    """Inputs of one coupling run.

    ``host_filter`` lists forbidden pairs: the core may only use pairs
    outside it (absent means the full complete graph is available).
    ``fixed_steps`` overrides the Poisson draw of the step count.
    """

    n: int
    target: DegreeSequence
    thinning: float
    mean_steps: float = 0.0
    host_filter: SimpleGraph | None = None
    fixed_steps: int | None = None
    estimator: EstimatorHandle = field(default_factory=EstimatorHandle.exact)
    run_completion: bool = True
    fallback_method: FactorSampleMethod | None = None
    debug_asserts: bool = False

    def __post_init__(self):
        if self.target.n != self.n:
            raise ValueError("target length must equal n")
        if not 0.0 <= self.thinning <= 1.0:
            raise ValueError(f"thinning {self.thinning} outside [0, 1]")
        if self.mean_steps < 0:
            raise ValueError("mean step count must be non-negative")
        if self.fixed_steps is not None and self.fixed_steps < 0:
            raise ValueError("fixed step count must be non-negative")
        if self.host_filter is not None:
            if self.host_filter.n != self.n:
                raise ValueError("host filter vertex count mismatch")
            deg = self.host_filter.degrees()
            for v, t in enumerate(self.target):
                if t > (self.n - 1) - deg[v]:
                    raise ValueError(
                        f"target degree {t} at vertex {v} cannot fit outside the host filter"
                    )

    def available_pairs(self) -> tuple[Edge, ...]:
        """Pairs the core graph may use."""
        if self.host_filter is None:
            return all_pairs(self.n)
        blocked = self.host_filter.edge_set()
        return tuple(e for e in all_pairs(self.n) if e not in blocked)

    def resolved_fallback_method(self) -> FactorSampleMethod:
        if self.fallback_method is not None:
            return self.fallback_method
        if self.estimator.mode == "empirical":
            return self.estimator.method
        return Enumerate()


@dataclass
class CouplingState:
    """One in-flight run.  Owned by a single thread of execution."""

    cfg: CouplingConfig
    steps_total: int
    rng_pair: RngStream
    rng_aux: RngStream
    lower_multi: MultiGraph
    core_multi: MultiGraph
    upper_multi: MultiGraph
    core_edges: set[Edge]
    residual: list[int]
    steps_done: int = 0
    fallback_triggered: bool = False
    max_shortfall: float = 0.0
    shortfall_breaches: int = 0

    @property
    def core(self) -> SimpleGraph:
        g = SimpleGraph(self.cfg.n)
        g.edge_set().update(self.core_edges)
        return g

    def residual_sequence(self) -> DegreeSequence:
        return DegreeSequence(self.residual)


@dataclass
class TripleOutput:
    """Final (lower, core, upper) graphs of one run, with run statistics."""

    lower: SimpleGraph
    core: SimpleGraph
    upper: SimpleGraph
    via_fallback: bool
    steps_run: int
    completion_steps: int
    max_shortfall: float
    shortfall_breaches: int

    def as_tuple(self) -> tuple[SimpleGraph, SimpleGraph, SimpleGraph]:
        return (self.lower, self.core, self.upper)


def _init_state(cfg: CouplingConfig, rng: RngStream) -> CouplingState:
    rng_pair = rng.child(0)
    rng_aux = rng.child(1)
    if cfg.fixed_steps is not None:
        steps = cfg.fixed_steps
    else:
        steps = rng_pair.poisson(cfg.mean_steps)
    return CouplingState(
        cfg=cfg,
        steps_total=steps,
        rng_pair=rng_pair,
        rng_aux=rng_aux,
        lower_multi=MultiGraph(cfg.n),
        core_multi=MultiGraph(cfg.n),
        upper_multi=MultiGraph(cfg.n),
        core_edges=set(),
        residual=list(cfg.target),
    )


def _candidate_probabilities(state: CouplingState) -> dict[Edge, float]:
    """Conditional containment probability for every admissible pair not
    yet in the core, under the residual target."""
    cfg = state.cfg
    remaining = tuple(
        e for e in cfg.available_pairs() if e not in state.core_edges
    )
    return _edge_probabilities(
        remaining,
        tuple(state.residual),
        remaining,
        cfg.estimator,
        state.rng_aux,
        cfg.n,
    )


def _check_step_invariants(state: CouplingState) -> None:
    cfg = state.cfg
    if state.upper_multi.total_multiplicity() != state.steps_done:
        raise InvariantViolation("upper multiplicity differs from step count")
    deg = [0] * cfg.n
    for u, v in state.core_edges:
        deg[u] += 1
        deg[v] += 1
    for v in range(cfg.n):
        if deg[v] + state.residual[v] != cfg.target[v]:
            raise InvariantViolation("residual bookkeeping drifted from core degrees")
        if state.residual[v] < 0:
            raise InvariantViolation("negative residual degree")
    if not state.fallback_triggered:
        lower = state.lower_multi.distinct_edges()
        upper = state.upper_multi.distinct_edges()
        if not state.core_edges <= upper:
            raise InvariantViolation("core left the upper graph")
        if cfg.host_filter is None:
            if not lower <= state.core_edges:
                raise InvariantViolation("lower graph left the core")
        else:
            blocked = cfg.host_filter.edge_set()
            if state.core_edges & blocked:
                raise InvariantViolation("core used a filtered pair")
            if not lower <= (state.core_edges | blocked):
                raise InvariantViolation("lower graph outside core + host filter")


def coupling_step(state: CouplingState, cfg: CouplingConfig | None = None) -> CouplingState:
    """Advance the run by one step (one pair, one coin).

    Must not be called after the fallback has triggered; the remaining
    steps then belong to the fallback tail, which no longer consults the
    estimator.
    """
    if cfg is None:
        cfg = state.cfg
    if state.fallback_triggered:
        raise InfeasibleState("step requested after the fallback triggered")
    pairs = all_pairs(cfg.n)
    e = pairs[state.rng_pair.integers(0, len(pairs))]
    a = state.rng_pair.random()

    state.steps_done += 1
    state.upper_multi.add(*e)
    if a > cfg.thinning:
        state.lower_multi.add(*e)

    blocked = cfg.host_filter is not None and e in cfg.host_filter
    if e in state.core_edges or blocked:
        pass  # core unchanged; the pair only feeds lower/upper
    elif sum(state.residual) == 0:
        # Degree target already met: every admissible pair has conditional
        # probability 0, i.e. shortfall 1.  That exceeds any thinning < 1
        # and triggers the fallback; at thinning == 1 the coin a < 1 always
        # rejects, so core and lower both stay unchanged.
        state.max_shortfall = max(state.max_shortfall, 1.0)
        if cfg.thinning < 1.0:
            state.shortfall_breaches += 1
            state.fallback_triggered = True
    else:
        probs = _candidate_probabilities(state)
        table = table_from_probabilities(probs)
        shortfall = table.values[e]
        state.max_shortfall = max(state.max_shortfall, shortfall)
        if shortfall > cfg.thinning:
            state.shortfall_breaches += 1
            state.fallback_triggered = True
        elif a >= shortfall:
            state.core_edges.add(e)
            state.core_multi.add(*e)
            u, v = e
            state.residual[u] -= 1
            state.residual[v] -= 1
            if state.residual[u] < 0 or state.residual[v] < 0:
                raise InfeasibleState(f"edge {e} overshot the degree target")
    if cfg.debug_asserts:
        _check_step_invariants(state)
    return state


def run_first_phase(cfg: CouplingConfig, rng: RngStream) -> CouplingState:
    """Run the per-step phase until the step budget or the fallback."""
    state = _init_state(cfg, rng)
    while state.steps_done < state.steps_total and not state.fallback_triggered:
        coupling_step(state, cfg)
    return state


def _finish(state: CouplingState, completion_steps: int) -> TripleOutput:
    core = SimpleGraph(state.cfg.n)
    core.edge_set().update(state.core_edges)
    return TripleOutput(
        lower=state.lower_multi.simplified(),
        core=core,
        upper=state.upper_multi.simplified(),
        via_fallback=state.fallback_triggered,
        steps_run=state.steps_total,
        completion_steps=completion_steps,
        max_shortfall=state.max_shortfall,
        shortfall_breaches=state.shortfall_breaches,
    )


def continue_with_fallback(cfg: CouplingConfig, state: CouplingState) -> TripleOutput:
    """Resample the core independently and play out the remaining steps.

    The fresh core is a uniform factor of the full available pair set with
    the full target; the tail steps keep feeding lower/upper exactly as
    the main loop would.
    """
    if not state.fallback_triggered:
        raise InfeasibleState("fallback continuation without a trigger")
    host = SimpleGraph(cfg.n, cfg.available_pairs())
    spec = HostedFactorSpec(host, cfg.target)
    fresh = uniform_factor(spec, cfg.resolved_fallback_method(), state.rng_aux)
    state.core_edges = set(fresh.edge_set())
    state.core_multi = MultiGraph(cfg.n)
    for u, v in state.core_edges:
        state.core_multi.add(u, v)
    state.residual = [0] * cfg.n
    pairs = all_pairs(cfg.n)
    while state.steps_done < state.steps_total:
        e = pairs[state.rng_pair.integers(0, len(pairs))]
        a = state.rng_pair.random()
        state.steps_done += 1
        state.upper_multi.add(*e)
        if a > cfg.thinning:
            state.lower_multi.add(*e)
    return _finish(state, 0)


def completion_phase(cfg: CouplingConfig, state: CouplingState) -> TripleOutput:
    """Fill the core up to the degree target, one edge at a time.

    Each added edge is drawn from the admissible pairs with probability
    proportional to its conditional containment probability; lower/upper
    are not touched.
    """
    if state.fallback_triggered:
        raise InfeasibleState("completion requested after the fallback triggered")
    goal = cfg.target.total // 2
    steps = 0
    while len(state.core_edges) < goal:
        probs = _candidate_probabilities(state)
        items = sorted(probs.items())
        total = math.fsum(p for _, p in items)
        if total <= 0.0:
            raise EmptySupport("no completion edge has positive probability")
        r = state.rng_aux.random() * total
        acc = 0.0
        pick = items[-1][0]
        for e, p in items:
            acc += p
            if r < acc:
                pick = e
                break
        state.core_edges.add(pick)
        state.core_multi.add(*pick)
        u, v = pick
        state.residual[u] -= 1
        state.residual[v] -= 1
        if state.residual[u] < 0 or state.residual[v] < 0:
            raise InfeasibleState(f"completion edge {pick} overshot the degree target")
        steps += 1
        if cfg.debug_asserts:
            _check_completion_invariants(state)
    return _finish(state, steps)


def _check_completion_invariants(state: CouplingState) -> None:
    cfg = state.cfg
    if cfg.host_filter is not None:
        if state.core_edges & cfg.host_filter.edge_set():
            raise InvariantViolation("completion used a filtered pair")
        lower = state.lower_multi.distinct_edges()
        if not lower <= (state.core_edges | cfg.host_filter.edge_set()):
            raise InvariantViolation("lower graph outside core + host filter")
    else:
        if not state.lower_multi.distinct_edges() <= state.core_edges:
            raise InvariantViolation("lower graph left the core")
    if any(r < 0 for r in state.residual):
        raise InvariantViolation("negative residual degree in completion")


def run_coupling(cfg: CouplingConfig, rng: RngStream) -> TripleOutput:
    """One full run: per-step phase, then fallback tail or completion."""
    state = run_first_phase(cfg, rng)
    if state.fallback_triggered:
        return continue_with_fallback(cfg, state)
    if cfg.run_completion:
        return completion_phase(cfg, state)
    return _finish(state, 0)
