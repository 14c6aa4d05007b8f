"""Random primitives: seedable streams, binomial graphs, Poisson counts,
and uniform factor samplers.

Factor enumeration is exact backtracking with residual-degree pruning and a
hard budget; the rejection and switch-chain samplers trade exactness for
reach and are never used where a test asserts an exact law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import BudgetExceeded, NoFactorExists
from .graphs import Edge, HostedFactorSpec, SimpleGraph, all_pairs

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

ENUMERATION_BUDGET = 10**7


def _splitmix64(z: int) -> int:
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def mix_seed(seed: int, key: int) -> int:
    """Pure 64-bit mixing of a parent seed and a small index.

    This is the (key+1)-th output of the splitmix64 stream seeded at
    ``seed``: finalize(seed + (key+1) * golden-gamma).  Distinct keys give
    statistically unrelated child seeds, and the derivation never touches
    generator state, so children are reproducible regardless of how much
    the parent stream has been consumed.
    """
    return _splitmix64((int(seed) + (int(key) + 1) * _GOLDEN) & _MASK64)


class RngStream:
    """A seeded random stream owned by exactly one consumer.

    Wraps ``numpy.random.Generator`` (PCG64).  The original seed is kept so
    child streams can be derived purely from (seed, key).
    """

    __slots__ = ("seed", "_gen")

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.default_rng(self.seed)

    def random(self) -> float:
        """Uniform float64 in [0, 1)."""
        return float(self._gen.random())

    def random_vector(self, size: int) -> np.ndarray:
        return self._gen.random(size)

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self._gen.integers(low, high))

    def poisson(self, mean: float) -> int:
        return int(self._gen.poisson(mean))

    def shuffle(self, seq: list) -> None:
        self._gen.shuffle(seq)

    def child(self, key: int) -> "RngStream":
        """Derive an independent sub-stream; see :func:`mix_seed`."""
        return RngStream(mix_seed(self.seed, key))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"


def derive_trial_stream(master_seed: int, trial_index: int) -> RngStream:
    """The dedicated stream for one trial of a seeded experiment.

    Pure function of (master seed, trial index); trials can run in any
    order or in parallel and still reproduce bit-identically.
    """
    if trial_index < 0:
        raise ValueError("trial index must be non-negative")
    return RngStream(mix_seed(master_seed, trial_index))


def gnp(n: int, p: float, rng: RngStream) -> SimpleGraph:
    """Binomial random graph: each pair is an edge independently w.p. p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    pairs = all_pairs(n)
    if p == 0.0 or not pairs:
        return SimpleGraph(n)
    mask = rng.random_vector(len(pairs)) < p
    g = SimpleGraph(n)
    g.edge_set().update(pairs[i] for i in np.flatnonzero(mask))
    return g


def uniform_edge(n: int, rng: RngStream) -> Edge:
    """A uniformly random vertex pair of the complete graph."""
    if n < 2:
        raise ValueError("need at least two vertices")
    pairs = all_pairs(n)
    return pairs[rng.integers(0, len(pairs))]


def poisson_steps(mean: float, rng: RngStream) -> int:
    """Poisson-distributed step count (exact sampler)."""
    if mean < 0:
        raise ValueError("Poisson mean must be non-negative")
    return rng.poisson(mean)


@dataclass(frozen=True)
class Enumerate:
    """Exact uniform sampling via full support enumeration."""


@dataclass(frozen=True)
class Rejection:
    """Stub-pairing restricted to the host, retried until simple.

    Collapses outside sparse regimes; intended only when the target sum is
    well below the host's degree mass.
    """

    retry_cap: int = 10**6


@dataclass(frozen=True)
class SwitchMcmc:
    """Two-edge switch walk on factors, started from a greedy factor.

    Approximate: burn-in defaults to 20*k*log(k+2) proposals for a k-edge
    factor, thinning to k.  Exactness is never claimed.
    """

    burn_in: int | None = None
    thinning: int | None = None


FactorSampleMethod = Union[Enumerate, Rejection, SwitchMcmc]


def _factor_walk(
    edge_list: list[Edge],
    target: tuple[int, ...],
    visit: Callable[[list[int]], bool],
) -> None:
    """Backtrack over host edges in lexicographic order.

    ``visit`` receives the indices of the chosen edges each time the
    residual target hits zero; returning True stops the walk.  Pruning:
    a branch dies as soon as some vertex needs more edges than remain
    incident to it in the unexplored suffix.
    """
    m = len(edge_list)
    n = len(target)
    # suffix[i][v] = number of edges e_j, j >= i, incident to v
    suffix = [[0] * n for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        row = suffix[i + 1][:]
        u, v = edge_list[i]
        row[u] += 1
        row[v] += 1
        suffix[i] = row
    resid = list(target)
    chosen: list[int] = []
    total = sum(resid)

    def rec(i: int, remaining: int) -> bool:
        if remaining == 0:
            return visit(chosen)
        if i == m or remaining > 2 * (m - i):
            return False
        row = suffix[i]
        for w in range(n):
            if resid[w] > row[w]:
                return False
        u, v = edge_list[i]
        if resid[u] > 0 and resid[v] > 0:
            resid[u] -= 1
            resid[v] -= 1
            chosen.append(i)
            if rec(i + 1, remaining - 2):
                return True
            chosen.pop()
            resid[u] += 1
            resid[v] += 1
        return rec(i + 1, remaining)

    rec(0, total)


def check_enumeration_budget(edge_count: int, target_sum: int) -> None:
    k = target_sum // 2
    if k > edge_count:
        return  # empty support, trivially cheap
    if math.comb(edge_count, k) > ENUMERATION_BUDGET:
        raise BudgetExceeded(
            f"C({edge_count}, {k}) candidate subsets exceed the "
            f"{ENUMERATION_BUDGET} enumeration budget"
        )


@lru_cache(maxsize=4096)
def _enumerate_edge_sets(
    n: int, host_edges: tuple[Edge, ...], target: tuple[int, ...]
) -> tuple[tuple[Edge, ...], ...]:
    check_enumeration_budget(len(host_edges), sum(target))
    edge_list = list(host_edges)
    out: list[tuple[Edge, ...]] = []

    def visit(chosen: list[int]) -> bool:
        out.append(tuple(edge_list[i] for i in chosen))
        return False

    _factor_walk(edge_list, target, visit)
    return tuple(out)


def enumerate_factors(spec: HostedFactorSpec) -> list[SimpleGraph]:
    """All subgraphs of the host with exactly the target degree sequence.

    Deterministic order (lexicographic by sorted edge list).  An empty
    support is a valid empty result, not an error.  Results are memoised
    per (host, target) since repeated sampling reuses the same support.
    """
    n, host_edges, target = spec.key()
    sets = _enumerate_edge_sets(n, host_edges, target)
    graphs = []
    for es in sets:
        g = SimpleGraph(n)
        g.edge_set().update(es)
        graphs.append(g)
    return graphs


def first_factor(spec: HostedFactorSpec) -> SimpleGraph | None:
    """One factor found by backtracking, or None if none exists."""
    edge_list = spec.host.sorted_edges()
    target = spec.target.values
    found: list[SimpleGraph] = []

    def visit(chosen: list[int]) -> bool:
        g = SimpleGraph(spec.n)
        g.edge_set().update(edge_list[i] for i in chosen)
        found.append(g)
        return True

    _factor_walk(edge_list, target, visit)
    return found[0] if found else None


def _rejection_sample(spec: HostedFactorSpec, cap: int, rng: RngStream) -> SimpleGraph:
    target = spec.target.values
    host_edges = spec.host.edge_set()
    stubs = [v for v, t in enumerate(target) for _ in range(t)]
    if not stubs:
        return SimpleGraph(spec.n)
    for _ in range(cap):
        rng.shuffle(stubs)
        edges: set[Edge] = set()
        ok = True
        for a, b in zip(stubs[::2], stubs[1::2]):
            if a == b:
                ok = False
                break
            e = (a, b) if a < b else (b, a)
            if e in edges or e not in host_edges:
                ok = False
                break
            edges.add(e)
        if ok:
            g = SimpleGraph(spec.n)
            g.edge_set().update(edges)
            return g
    raise NoFactorExists(
        f"rejection sampler exhausted {cap} attempts without a simple pairing"
    )


def _switch_chain_sample(
    spec: HostedFactorSpec, method: SwitchMcmc, rng: RngStream
) -> SimpleGraph:
    start = first_factor(spec)
    if start is None:
        raise NoFactorExists("no factor exists for the given host and target")
    factor = start.sorted_edges()
    k = len(factor)
    if k < 2:
        return start
    in_factor = set(factor)
    host_edges = spec.host.edge_set()
    burn = method.burn_in
    if burn is None:
        burn = int(20 * k * math.log(k + 2))
    for _ in range(burn):
        i = rng.integers(0, k)
        j = rng.integers(0, k)
        if i == j:
            continue
        a, b = factor[i]
        c, d = factor[j]
        if len({a, b, c, d}) < 4:
            continue
        if rng.random() < 0.5:
            e1, e2 = (min(a, c), max(a, c)), (min(b, d), max(b, d))
        else:
            e1, e2 = (min(a, d), max(a, d)), (min(b, c), max(b, c))
        if e1 in in_factor or e2 in in_factor:
            continue
        if e1 not in host_edges or e2 not in host_edges:
            continue
        in_factor.discard(factor[i])
        in_factor.discard(factor[j])
        in_factor.add(e1)
        in_factor.add(e2)
        factor[i] = e1
        factor[j] = e2
    g = SimpleGraph(spec.n)
    g.edge_set().update(in_factor)
    return g


def uniform_factor(
    spec: HostedFactorSpec, method: FactorSampleMethod, rng: RngStream
) -> SimpleGraph:
    """A random factor of the host with the exact target degree sequence.

    ``Enumerate`` is exactly uniform; the other methods are approximate but
    always return a graph with the exact target degrees inside the host.
    """
    if isinstance(method, Enumerate):
        n, host_edges, target = spec.key()
        support = _enumerate_edge_sets(n, host_edges, target)
        if not support:
            raise NoFactorExists("no factor exists for the given host and target")
        result = SimpleGraph(n)
        result.edge_set().update(support[rng.integers(0, len(support))])
    elif isinstance(method, Rejection):
        result = _rejection_sample(spec, method.retry_cap, rng)
    elif isinstance(method, SwitchMcmc):
        result = _switch_chain_sample(spec, method, rng)
    else:
        raise TypeError(f"unknown factor sample method: {method!r}")
    # contract checked on every call, for every method
    assert result.degrees() == list(spec.target), "sampled factor has wrong degrees"
    assert result.edge_set() <= spec.host.edge_set(), "sampled factor leaves the host"
    return result
