import pytest
from scipy import stats as sps

from graphsandwich import (
    CouplingConfig,
    DegreeSequence,
    EstimatorHandle,
    HostedFactorSpec,
    InfeasibleState,
    SimpleGraph,
    coupling_step,
    derive_trial_stream,
    enumerate_factors,
    is_subgraph,
    run_coupling,
    run_first_phase,
    solve_mean_steps_stage1,
)
from graphsandwich.coupling import continue_with_fallback


def base_config(**kw):
    defaults = dict(
        n=5,
        target=DegreeSequence.constant(5, 2),
        thinning=0.4,
        mean_steps=solve_mean_steps_stage1(5, 2, 0.2),
        run_completion=False,
    )
    defaults.update(kw)
    return CouplingConfig(**defaults)


def test_zero_steps_leaves_everything_empty():
    out = run_coupling(base_config(fixed_steps=0), derive_trial_stream(1, 0))
    assert out.lower == SimpleGraph(5)
    assert out.core == SimpleGraph(5)
    assert out.upper == SimpleGraph(5)
    assert out.steps_run == 0


def test_upper_multiplicity_equals_step_count():
    for k in (1, 3, 7, 12):
        state = run_first_phase(base_config(fixed_steps=k, thinning=1.0), derive_trial_stream(2, k))
        assert state.upper_multi.total_multiplicity() == k
        assert state.steps_done == k


def test_upper_multiplicity_reaches_budget_through_fallback():
    # thinning 0 triggers the fallback quickly, yet the upper multigraph
    # still collects exactly one pair per budgeted step
    for i in range(30):
        cfg = base_config(fixed_steps=9, thinning=0.0)
        state = run_first_phase(cfg, derive_trial_stream(3, i))
        if state.fallback_triggered:
            out = continue_with_fallback(cfg, state)
            assert state.upper_multi.total_multiplicity() == 9
            assert out.via_fallback


def test_thinning_one_keeps_lower_empty():
    out = run_coupling(base_config(fixed_steps=15, thinning=1.0), derive_trial_stream(4, 0))
    assert out.lower.edge_count == 0


def test_thinning_zero_makes_lower_equal_upper():
    for i in range(40):
        out = run_coupling(base_config(thinning=0.0), derive_trial_stream(5, i))
        assert out.lower == out.upper


def test_first_step_never_triggers_from_symmetry():
    # from the empty core on a complete host every pair is equivalent
    for i in range(200):
        state = run_first_phase(base_config(fixed_steps=1, thinning=0.0), derive_trial_stream(6, i))
        assert not state.fallback_triggered


def test_step_after_trigger_is_refused():
    for i in range(200):
        cfg = base_config(fixed_steps=20, thinning=0.0)
        state = run_first_phase(cfg, derive_trial_stream(7, i))
        if state.fallback_triggered:
            with pytest.raises(InfeasibleState):
                coupling_step(state, cfg)
            break
    else:
        pytest.fail("no trigger found")


def test_debug_invariants_hold_across_runs():
    # per-step assertions raise on any violation; this sweep must be silent
    cfg = base_config(thinning=0.5, run_completion=True, debug_asserts=True)
    for i in range(3000):
        out = run_coupling(cfg, derive_trial_stream(8, i))
        if not out.via_fallback:
            assert is_subgraph(out.lower, out.core)
        assert out.core.degrees() == [2] * 5


def test_completion_from_empty_start_counts():
    cfg = base_config(fixed_steps=0, run_completion=True)
    out = run_coupling(cfg, derive_trial_stream(9, 0))
    assert out.core.degrees() == [2] * 5
    assert out.completion_steps == 5


def test_completion_from_empty_is_uniform():
    spec = HostedFactorSpec(SimpleGraph.complete(5), DegreeSequence.constant(5, 2))
    support = enumerate_factors(spec)
    index = {tuple(f.sorted_edges()): i for i, f in enumerate(support)}
    counts = [0] * len(support)
    cfg = base_config(fixed_steps=0, run_completion=True)
    draws = 60000
    for i in range(draws):
        out = run_coupling(cfg, derive_trial_stream(10, i))
        counts[index[tuple(out.core.sorted_edges())]] += 1
    _, p = sps.chisquare(counts)
    assert p > 1e-3


def test_fallback_resample_is_uniform():
    # thinning 0 makes any positive shortfall trigger; the resampled core
    # must follow the exactly uniform factor law
    spec = HostedFactorSpec(SimpleGraph.complete(5), DegreeSequence.constant(5, 2))
    support = enumerate_factors(spec)
    index = {tuple(f.sorted_edges()): i for i, f in enumerate(support)}
    counts = [0] * len(support)
    collected = 0
    i = 0
    cfg = base_config(thinning=0.0, run_completion=True)
    while collected < 12000:
        out = run_coupling(cfg, derive_trial_stream(11, i))
        i += 1
        if out.via_fallback:
            counts[index[tuple(out.core.sorted_edges())]] += 1
            collected += 1
    _, p = sps.chisquare(counts)
    assert p > 1e-3


def test_completed_core_triggers_fallback_below_thinning_one():
    # a large fixed budget completes the 2-regular core early; once no
    # admissible pair has positive probability the run must fall back
    cfg = base_config(fixed_steps=60, thinning=0.9, run_completion=False)
    saw_trigger = False
    for i in range(50):
        state = run_first_phase(cfg, derive_trial_stream(12, i))
        if state.fallback_triggered and sum(state.residual) == 0:
            saw_trigger = True
    assert saw_trigger


def test_completed_core_at_thinning_one_never_triggers():
    cfg = base_config(fixed_steps=60, thinning=1.0, run_completion=False)
    for i in range(60):
        state = run_first_phase(cfg, derive_trial_stream(13, i))
        assert not state.fallback_triggered


def test_host_filter_keeps_core_outside():
    host_filter = SimpleGraph(5, [(0, 1), (2, 3)])
    cfg = CouplingConfig(
        n=5,
        target=DegreeSequence.constant(5, 2),
        thinning=0.3,
        mean_steps=6.0,
        host_filter=host_filter,
        run_completion=True,
    )
    for i in range(300):
        out = run_coupling(cfg, derive_trial_stream(14, i))
        assert not (out.core.edge_set() & host_filter.edge_set())
        assert out.core.degrees() == [2] * 5


def test_lower_upper_blind_to_host_filter():
    # identical streams, different filters: the (lower, upper) pair of
    # multigraph draws must be bit-identical
    base = dict(n=6, target=DegreeSequence.constant(6, 2), thinning=0.3, mean_steps=8.0)
    filt = SimpleGraph(6, [(0, 1), (3, 4), (2, 5)])
    for i in range(40):
        rng_a = derive_trial_stream(15, i)
        rng_b = derive_trial_stream(15, i)
        a = run_coupling(CouplingConfig(**base, run_completion=True), rng_a)
        b = run_coupling(
            CouplingConfig(**base, host_filter=filt, run_completion=True), rng_b
        )
        assert a.lower == b.lower
        assert a.upper == b.upper


def test_config_validation():
    with pytest.raises(ValueError):
        base_config(thinning=1.5)
    with pytest.raises(ValueError):
        base_config(mean_steps=-1.0)
    with pytest.raises(ValueError):
        CouplingConfig(
            n=4,
            target=DegreeSequence.constant(4, 3),
            thinning=0.5,
            host_filter=SimpleGraph(4, [(0, 1)]),
        )  # degree 3 cannot avoid the filtered pair at vertex 0


def test_heuristic_estimator_runs():
    cfg = base_config(
        estimator=EstimatorHandle.heuristic(),
        run_completion=False,
        fixed_steps=4,
    )
    out = run_coupling(cfg, derive_trial_stream(16, 0))
    assert out.upper.edge_count <= 4
