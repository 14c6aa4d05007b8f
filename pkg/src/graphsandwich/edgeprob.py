"""Conditional edge probabilities for random factors, and the relative
shortfall tables the coupling consumes.

For a host S with target degrees t, the central quantity is
P(e in F) where F is a uniformly random t-factor of S.  Exact mode counts
factors by enumeration (one backtracking pass counts containment for every
edge simultaneously, memoised per (host, target)); heuristic mode uses the
stub-pairing estimate t_u*t_v / sum(t); empirical mode measures frequencies
over repeated factor samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from .errors import AllZeroProbabilities, EmptySupport
from .graphs import DegreeSequence, Edge, HostedFactorSpec, SimpleGraph
from .sampling import (
    Enumerate,
    FactorSampleMethod,
    RngStream,
    check_enumeration_budget,
    uniform_factor,
    _factor_walk,
)

EXACT = "exact"
HEURISTIC = "heuristic"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class EstimatorHandle:
    """How conditional edge probabilities are computed.

    exact      -- enumeration counts (requires the enumeration budget)
    heuristic  -- min(1, t_u*t_v / max(1, sum(t))), clamped to 0 when an
                  endpoint has no residual degree
    empirical  -- frequency over ``sample_count`` factor samples
    """

    mode: str = EXACT
    sample_count: int = 0
    method: FactorSampleMethod = field(default_factory=Enumerate)

    def __post_init__(self):
        if self.mode not in (EXACT, HEURISTIC, EMPIRICAL):
            raise ValueError(f"unknown estimator mode {self.mode!r}")
        if self.mode == EMPIRICAL and self.sample_count < 1:
            raise ValueError("empirical estimator needs sample_count >= 1")

    @classmethod
    def exact(cls) -> "EstimatorHandle":
        return cls(EXACT)

    @classmethod
    def heuristic(cls) -> "EstimatorHandle":
        return cls(HEURISTIC)

    @classmethod
    def empirical(
        cls, sample_count: int, method: FactorSampleMethod | None = None
    ) -> "EstimatorHandle":
        return cls(EMPIRICAL, sample_count, method or Enumerate())

    @classmethod
    def parse(cls, text: str) -> "EstimatorHandle":
        """Parse 'exact', 'heuristic' or 'empirical:K'."""
        if text == EXACT:
            return cls.exact()
        if text == HEURISTIC:
            return cls.heuristic()
        if text.startswith(EMPIRICAL):
            _, _, k = text.partition(":")
            if not k:
                raise ValueError("empirical estimator needs a sample count, e.g. empirical:1000")
            return cls.empirical(int(k))
        raise ValueError(f"unknown estimator {text!r}")

    def describe(self) -> str:
        if self.mode == EMPIRICAL:
            return f"empirical:{self.sample_count}"
        return self.mode


@dataclass(frozen=True)
class FactorStats:
    """Enumeration counts: total factors and per-edge containment counts."""

    total: int
    edge_counts: dict[Edge, int]


@lru_cache(maxsize=200_000)
def _stats_cached(n: int, host_edges: tuple[Edge, ...], target: tuple[int, ...]) -> FactorStats:
    check_enumeration_budget(len(host_edges), sum(target))
    edge_list = list(host_edges)
    counts = [0] * len(edge_list)
    total = 0

    def visit(chosen: list[int]) -> bool:
        nonlocal total
        total += 1
        for i in chosen:
            counts[i] += 1
        return False

    _factor_walk(edge_list, target, visit)
    return FactorStats(total, {e: c for e, c in zip(edge_list, counts) if c})


def factor_statistics(spec: HostedFactorSpec) -> FactorStats:
    """Exact factor counts for a spec (memoised)."""
    n, edges, target = spec.key()
    return _stats_cached(n, edges, target)


def clear_statistics_cache() -> None:
    _stats_cached.cache_clear()


def _edge_probabilities(
    host_edges: tuple[Edge, ...],
    target: tuple[int, ...],
    candidates: Iterable[Edge],
    est: EstimatorHandle,
    rng: RngStream | None,
    n: int,
) -> dict[Edge, float]:
    if est.mode == EXACT:
        stats = _stats_cached(n, host_edges, target)
        if stats.total == 0:
            raise EmptySupport("no factor exists for the given host and target")
        return {e: stats.edge_counts.get(e, 0) / stats.total for e in candidates}
    if est.mode == HEURISTIC:
        s = max(1, sum(target))
        out = {}
        for u, v in candidates:
            tu, tv = target[u], target[v]
            out[(u, v)] = 0.0 if tu == 0 or tv == 0 else min(1.0, tu * tv / s)
        return out
    # empirical
    if rng is None:
        raise ValueError("empirical estimator needs an RngStream")
    host = SimpleGraph(n, host_edges)
    spec = HostedFactorSpec(host, DegreeSequence(target))
    cand = list(candidates)
    hits = dict.fromkeys(cand, 0)
    for _ in range(est.sample_count):
        f = uniform_factor(spec, est.method, rng)
        fe = f.edge_set()
        for e in cand:
            if e in fe:
                hits[e] += 1
    return {e: hits[e] / est.sample_count for e in cand}


def conditional_edge_prob(
    spec: HostedFactorSpec,
    edge: Edge,
    est: EstimatorHandle,
    rng: RngStream | None = None,
) -> float:
    """P(edge in F) for a uniformly random factor F of the given host and target."""
    u, v = edge
    e = (u, v) if u < v else (v, u)
    if e not in spec.host:
        raise ValueError(f"edge {e} is not a host edge")
    n, host_edges, target = spec.key()
    return _edge_probabilities(host_edges, target, [e], est, rng, n)[e]


def complement_edge_prob(
    spec: HostedFactorSpec,
    edge: Edge,
    est: EstimatorHandle,
    rng: RngStream | None = None,
) -> float:
    """P(edge not in F) = P(edge in the complementary factor of the host).

    Equals conditional_edge_prob with the complementary target
    t' = degrees(host) - t.  In exact mode this is computed as
    (total - containing) / total so the identity holds bit-for-bit.
    """
    u, v = edge
    e = (u, v) if u < v else (v, u)
    if e not in spec.host:
        raise ValueError(f"edge {e} is not a host edge")
    if est.mode == EXACT:
        stats = factor_statistics(spec)
        if stats.total == 0:
            raise EmptySupport("no factor exists for the given host and target")
        return (stats.total - stats.edge_counts.get(e, 0)) / stats.total
    return 1.0 - conditional_edge_prob(spec, e, est, rng)


def exact_edge_counts(spec: HostedFactorSpec, edge: Edge) -> tuple[int, int]:
    """(number of factors containing the edge, total factors)."""
    u, v = edge
    e = (u, v) if u < v else (v, u)
    if e not in spec.host:
        raise ValueError(f"edge {e} is not a host edge")
    stats = factor_statistics(spec)
    if stats.total == 0:
        raise EmptySupport("no factor exists for the given host and target")
    return stats.edge_counts.get(e, 0), stats.total


@dataclass(frozen=True)
class ShortfallTable:
    """Relative shortfall of each candidate edge below the best candidate.

    values[e] = 1 - p_e / max_p; the argmax edge always has shortfall 0.
    Scaling every probability by a constant leaves the table unchanged.
    """

    values: dict[Edge, float]
    max_prob_edge: Edge
    max_prob: float


def shortfall_table(
    spec: HostedFactorSpec,
    candidates: Iterable[Edge],
    est: EstimatorHandle,
    rng: RngStream | None = None,
) -> ShortfallTable:
    """Shortfall of every candidate edge's probability below the maximum."""
    cand = [tuple(sorted(e)) for e in candidates]
    if not cand:
        raise ValueError("candidate set must be nonempty")
    for e in cand:
        if e not in spec.host:
            raise ValueError(f"candidate {e} is not a host edge")
    n, host_edges, target = spec.key()
    probs = _edge_probabilities(host_edges, target, cand, est, rng, n)
    return table_from_probabilities(probs)


def table_from_probabilities(probs: dict[Edge, float]) -> ShortfallTable:
    best = max(probs, key=lambda e: (probs[e], e))
    pmax = probs[best]
    if pmax <= 0.0:
        raise AllZeroProbabilities(
            "every candidate edge has probability zero; the coupling cannot proceed"
        )
    return ShortfallTable(
        values={e: 1.0 - p / pmax for e, p in probs.items()},
        max_prob_edge=best,
        max_prob=pmax,
    )
