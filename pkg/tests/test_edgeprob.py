import math
from itertools import combinations

import pytest

from graphsandwich import (
    AllZeroProbabilities,
    BudgetExceeded,
    DegreeSequence,
    EstimatorHandle,
    HostedFactorSpec,
    RngStream,
    SimpleGraph,
    all_pairs,
    complement_edge_prob,
    conditional_edge_prob,
    exact_edge_counts,
    factor_statistics,
    gnp,
    shortfall_table,
)
from graphsandwich.edgeprob import table_from_probabilities

EXACT = EstimatorHandle.exact()
HEUR = EstimatorHandle.heuristic()


def k5_two_regular():
    return HostedFactorSpec(SimpleGraph.complete(5), DegreeSequence.constant(5, 2))


def random_feasible_specs(count, seed, max_n=6):
    """Seeded specs whose target comes from a real subgraph, so a factor
    always exists."""
    rng = RngStream(seed)
    specs = []
    while len(specs) < count:
        n = 3 + rng.integers(0, max_n - 2)
        host = gnp(n, 0.4 + 0.5 * rng.random(), rng)
        if host.edge_count == 0:
            continue
        sub = SimpleGraph(n)
        for e in host.sorted_edges():
            if rng.random() < 0.55:
                sub.add_edge(*e)
        target = DegreeSequence(sub.degrees())
        if target.total == 0:
            continue
        specs.append(HostedFactorSpec(host, target))
    return specs


def naive_edge_prob(spec, edge):
    """Oracle by direct subset filtering, independent of the backtracker."""
    edges = spec.host.sorted_edges()
    k = spec.target.total // 2
    total = 0
    containing = 0
    for sub in combinations(edges, k):
        deg = [0] * spec.host.n
        for u, v in sub:
            deg[u] += 1
            deg[v] += 1
        if deg == list(spec.target):
            total += 1
            if edge in sub:
                containing += 1
    return containing, total


def test_exact_matching_probability():
    spec = HostedFactorSpec(SimpleGraph.complete(4), DegreeSequence.constant(4, 1))
    for e in all_pairs(4):
        assert conditional_edge_prob(spec, e, EXACT) == pytest.approx(1 / 3, abs=0)


def test_exact_five_cycle_probability():
    spec = k5_two_regular()
    for e in all_pairs(5):
        assert conditional_edge_prob(spec, e, EXACT) == 0.5


def test_zero_target_endpoint_is_zero_in_every_mode():
    spec = HostedFactorSpec(SimpleGraph.complete(4), DegreeSequence((0, 2, 1, 1)))
    emp = EstimatorHandle.empirical(200)
    assert conditional_edge_prob(spec, (0, 1), EXACT) == 0.0
    assert conditional_edge_prob(spec, (0, 1), HEUR) == 0.0
    assert conditional_edge_prob(spec, (0, 1), emp, RngStream(3)) == 0.0


def test_unique_factor_gives_probability_one():
    host = SimpleGraph(4, [(0, 1), (1, 2), (2, 3)])
    spec = HostedFactorSpec(host, DegreeSequence(host.degrees()))
    assert conditional_edge_prob(spec, (1, 2), EXACT) == 1.0


def test_exact_edge_counts():
    spec = HostedFactorSpec(SimpleGraph.complete(4), DegreeSequence.constant(4, 1))
    assert exact_edge_counts(spec, (0, 1)) == (1, 3)


def test_complement_examples():
    spec = HostedFactorSpec(SimpleGraph.complete(4), DegreeSequence.constant(4, 1))
    for e in all_pairs(4):
        assert complement_edge_prob(spec, e, EXACT) == pytest.approx(2 / 3, abs=0)
    zero = HostedFactorSpec(SimpleGraph.complete(4), DegreeSequence.constant(4, 0))
    for e in all_pairs(4):
        assert complement_edge_prob(zero, e, EXACT) == 1.0


def test_complement_equals_conditional_on_complementary_target():
    # float-exact equality, both sides computed from the same counts
    for spec in random_feasible_specs(20, seed=424):
        host_deg = spec.host.degrees()
        comp = HostedFactorSpec(
            spec.host,
            DegreeSequence([h - t for h, t in zip(host_deg, spec.target)]),
        )
        for e in spec.host.sorted_edges():
            assert complement_edge_prob(spec, e, EXACT) == conditional_edge_prob(
                comp, e, EXACT
            )


def test_complement_plus_conditional_is_one_in_counts():
    from fractions import Fraction

    for spec in random_feasible_specs(10, seed=77):
        for e in spec.host.sorted_edges():
            c, t = exact_edge_counts(spec, e)
            assert Fraction(c, t) + Fraction(t - c, t) == 1


def test_edge_prob_sum_identity():
    # every factor has sum(target)/2 edges, so probabilities sum to that
    for spec in random_feasible_specs(10, seed=99):
        total = math.fsum(
            conditional_edge_prob(spec, e, EXACT) for e in spec.host.sorted_edges()
        )
        assert abs(total - spec.target.total / 2) <= 1e-9


def test_exact_against_naive_oracle():
    for spec in random_feasible_specs(8, seed=5, max_n=5):
        for e in spec.host.sorted_edges():
            c, t = naive_edge_prob(spec, e)
            assert exact_edge_counts(spec, e) == (c, t)


def test_heuristic_values():
    spec = k5_two_regular()
    assert conditional_edge_prob(spec, (0, 1), HEUR) == pytest.approx(0.4)
    capped = HostedFactorSpec(SimpleGraph.complete(4), DegreeSequence((2, 2, 0, 0)))
    assert conditional_edge_prob(capped, (0, 1), HEUR) == 1.0


def test_empirical_convergence_on_five_cycles():
    spec = k5_two_regular()
    est = EstimatorHandle.empirical(100000)
    p = conditional_edge_prob(spec, (1, 3), est, RngStream(2024))
    assert abs(p - 0.5) < 0.01


def test_requires_host_edge():
    host = SimpleGraph(4, [(0, 1), (1, 2), (2, 3)])
    spec = HostedFactorSpec(host, DegreeSequence((1, 1, 1, 1)))
    with pytest.raises(ValueError):
        conditional_edge_prob(spec, (0, 3), EXACT)


def test_empirical_requires_rng():
    with pytest.raises(ValueError):
        conditional_edge_prob(k5_two_regular(), (0, 1), EstimatorHandle.empirical(10))


def test_budget_exceeded_in_exact_mode():
    host = SimpleGraph.complete(24)
    spec = HostedFactorSpec(host, DegreeSequence.constant(24, 9))
    with pytest.raises(BudgetExceeded):
        conditional_edge_prob(spec, (0, 1), EXACT)


def test_estimator_parse():
    assert EstimatorHandle.parse("exact").mode == "exact"
    assert EstimatorHandle.parse("heuristic").mode == "heuristic"
    e = EstimatorHandle.parse("empirical:500")
    assert e.mode == "empirical" and e.sample_count == 500
    with pytest.raises(ValueError):
        EstimatorHandle.parse("empirical")
    with pytest.raises(ValueError):
        EstimatorHandle.parse("magic")


def test_shortfall_symmetric_state_all_zero():
    spec = k5_two_regular()
    table = shortfall_table(spec, all_pairs(5), EXACT)
    assert all(v == 0.0 for v in table.values.values())
    assert table.max_prob == 0.5


def test_shortfall_arithmetic():
    t = table_from_probabilities({(0, 1): 0.5, (0, 2): 0.25})
    assert t.values[(0, 1)] == 0.0
    assert t.values[(0, 2)] == 0.5
    assert t.max_prob_edge == (0, 1)


def test_shortfall_scale_invariance():
    a = table_from_probabilities({(0, 1): 0.2, (1, 2): 0.1, (0, 2): 0.05})
    b = table_from_probabilities({(0, 1): 0.8, (1, 2): 0.4, (0, 2): 0.2})
    assert a.values == b.values


def test_shortfall_table_matches_brute_force():
    host = SimpleGraph(5, [e for e in all_pairs(5) if e != (0, 1)])
    spec = HostedFactorSpec(host, DegreeSequence((1, 1, 2, 2, 2)))
    table = shortfall_table(spec, host.sorted_edges(), EXACT)
    # recompute from the naive counts
    probs = {}
    for e in host.sorted_edges():
        c, t = naive_edge_prob(spec, e)
        probs[e] = c / t
    pmax = max(probs.values())
    for e, got in table.values.items():
        assert abs(got - (1 - probs[e] / pmax)) <= 1e-12
    assert min(table.values.values()) == 0.0
    assert all(0.0 <= v <= 1.0 for v in table.values.values())


def test_shortfall_all_zero_probabilities():
    spec = HostedFactorSpec(SimpleGraph.complete(4), DegreeSequence.constant(4, 0))
    with pytest.raises(AllZeroProbabilities):
        shortfall_table(spec, all_pairs(4), EXACT)


def test_shortfall_rejects_foreign_candidates():
    host = SimpleGraph(4, [(0, 1), (1, 2), (2, 3)])
    spec = HostedFactorSpec(host, DegreeSequence((1, 1, 1, 1)))
    with pytest.raises(ValueError):
        shortfall_table(spec, [(0, 3)], EXACT)
    with pytest.raises(ValueError):
        shortfall_table(spec, [], EXACT)


def test_factor_statistics_cached_identity():
    spec = k5_two_regular()
    s1 = factor_statistics(spec)
    s2 = factor_statistics(k5_two_regular())
    assert s1 is s2  # memoised on the (host, target) key
    assert s1.total == 12
