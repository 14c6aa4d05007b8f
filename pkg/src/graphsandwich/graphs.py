"""Vertex-labelled graphs and degree-sequence bookkeeping.

Vertices are the integers 0..n-1.  Undirected edges are stored as tuples
``(u, v)`` with ``u < v`` so that edge sets compare, hash and serialise
deterministically.  All types here are either immutable after construction
or owned by exactly one simulation run; nothing is shared mutably.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from typing import Iterable, Iterator

from .errors import InfeasibleState

Edge = tuple[int, int]


def normalize_edge(u: int, v: int) -> Edge:
    if u == v:
        raise ValueError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@lru_cache(maxsize=None)
def all_pairs(n: int) -> tuple[Edge, ...]:
    """All C(n,2) vertex pairs in lexicographic order."""
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


class DegreeSequence:
    """Per-vertex degree targets with derived summary statistics.

    Entries must be non-negative, at most n-1, and sum to an even number
    (every graph realising the sequence has sum/2 edges).
    """

    __slots__ = ("values",)

    def __init__(self, values: Iterable[int]):
        vals = tuple(int(v) for v in values)
        n = len(vals)
        for i, v in enumerate(vals):
            if v < 0:
                raise ValueError(f"negative degree {v} at vertex {i}")
            if v > n - 1:
                raise ValueError(f"degree {v} at vertex {i} exceeds n-1={n - 1}")
        if sum(vals) % 2 != 0:
            raise ValueError(f"degree sum {sum(vals)} is odd")
        self.values = vals

    @classmethod
    def constant(cls, n: int, d: int) -> "DegreeSequence":
        return cls((d,) * n)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def total(self) -> int:
        return sum(self.values)

    @property
    def max_value(self) -> int:
        return max(self.values) if self.values else 0

    @property
    def min_value(self) -> int:
        return min(self.values) if self.values else 0

    @property
    def spread(self) -> int:
        """max - min, the range of the sequence."""
        return self.max_value - self.min_value

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, DegreeSequence) and self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return f"DegreeSequence({list(self.values)!r})"


class SimpleGraph:
    """A simple undirected graph: no loops, no repeated edges.

    Membership tests are O(1); construction normalises and validates every
    edge.  Instances compare by value.  The mutating helpers are meant for
    an exclusive owner (a single coupling run); treat graphs you did not
    build as read-only.
    """

    __slots__ = ("n", "_edges")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = n
        es: set[Edge] = set()
        for u, v in edges:
            e = normalize_edge(u, v)
            if e[0] < 0 or e[1] >= n:
                raise ValueError(f"edge {e} out of range for n={n}")
            es.add(e)
        self._edges = es

    @classmethod
    def complete(cls, n: int) -> "SimpleGraph":
        return cls(n, all_pairs(n))

    @classmethod
    def empty(cls, n: int) -> "SimpleGraph":
        return cls(n)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self._edges)

    def edge_set(self) -> set[Edge]:
        """The live internal edge set.  Owners only."""
        return self._edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self._edges)

    def has_edge(self, u: int, v: int) -> bool:
        return normalize_edge(u, v) in self._edges

    def __contains__(self, edge: Edge) -> bool:
        return edge in self._edges

    def add_edge(self, u: int, v: int) -> None:
        e = normalize_edge(u, v)
        if e[0] < 0 or e[1] >= self.n:
            raise ValueError(f"edge {e} out of range for n={self.n}")
        self._edges.add(e)

    def degree(self, v: int) -> int:
        return sum(1 for e in self._edges if v in e)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self._edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbors(self, v: int) -> Iterator[int]:
        for a, b in self._edges:
            if a == v:
                yield b
            elif b == v:
                yield a

    def density(self) -> float:
        m = len(all_pairs(self.n))
        return len(self._edges) / m if m else 0.0

    def copy(self) -> "SimpleGraph":
        g = SimpleGraph(self.n)
        g._edges = set(self._edges)
        return g

    def canonical_key(self) -> tuple:
        return (self.n, tuple(self.sorted_edges()))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SimpleGraph)
            and self.n == other.n
            and self._edges == other._edges
        )

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self._edges)))

    def __repr__(self) -> str:
        return f"SimpleGraph(n={self.n}, edges={self.sorted_edges()!r})"

    # Edge-list file format: first line "n m", then m lines "u v" with
    # u < v, sorted lexicographically, 0-indexed, newline-terminated.

    def to_text(self) -> str:
        lines = [f"{self.n} {self.edge_count}"]
        lines.extend(f"{u} {v}" for u, v in self.sorted_edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SimpleGraph":
        lines = text.splitlines()
        if not lines:
            raise ValueError("line 1: empty edge-list input")
        head = lines[0].split()
        if len(head) != 2:
            raise ValueError("line 1: expected 'n m'")
        try:
            n, m = int(head[0]), int(head[1])
        except ValueError:
            raise ValueError("line 1: expected two integers 'n m'") from None
        body = [ln for ln in lines[1:] if ln.strip()]
        if len(body) != m:
            raise ValueError(f"expected {m} edge lines, found {len(body)}")
        edges = []
        for i, ln in enumerate(body, start=2):
            parts = ln.split()
            if len(parts) != 2:
                raise ValueError(f"line {i}: expected 'u v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"line {i}: expected two integers") from None
            if not (0 <= u < v < n):
                raise ValueError(f"line {i}: edge ({u}, {v}) must satisfy 0 <= u < v < n")
            if (u, v) in edges:
                raise ValueError(f"line {i}: duplicate edge ({u}, {v})")
            edges.append((u, v))
        return cls(n, edges)

    def write_file(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_text())

    @classmethod
    def read_file(cls, path) -> "SimpleGraph":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_text(fh.read())


class MultiGraph:
    """An undirected multigraph stored as multiplicity counts per pair.

    Only simplification and counts are ever consumed downstream, so the
    representation does not keep individual insertion events.
    """

    __slots__ = ("n", "_mult")

    def __init__(self, n: int):
        self.n = n
        self._mult: Counter[Edge] = Counter()

    def add(self, u: int, v: int, count: int = 1) -> None:
        e = normalize_edge(u, v)
        if e[0] < 0 or e[1] >= self.n:
            raise ValueError(f"edge {e} out of range for n={self.n}")
        self._mult[e] += count

    def multiplicity(self, u: int, v: int) -> int:
        return self._mult.get(normalize_edge(u, v), 0)

    def total_multiplicity(self) -> int:
        return sum(self._mult.values())

    def distinct_edges(self) -> set[Edge]:
        return set(self._mult)

    @property
    def distinct_count(self) -> int:
        return len(self._mult)

    def simplified(self) -> SimpleGraph:
        g = SimpleGraph(self.n)
        g._edges = set(self._mult)
        return g

    def copy(self) -> "MultiGraph":
        m = MultiGraph(self.n)
        m._mult = Counter(self._mult)
        return m

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiGraph)
            and self.n == other.n
            and self._mult == other._mult
        )

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, mult={dict(sorted(self._mult.items()))!r})"


class HostedFactorSpec:
    """A host graph together with a target degree sequence.

    Describes the distribution "uniformly random subgraph of ``host`` whose
    degree sequence equals ``target``" (a factor of the host).
    """

    __slots__ = ("host", "target")

    def __init__(self, host: SimpleGraph, target: DegreeSequence):
        if target.n != host.n:
            raise ValueError(f"target length {target.n} != host vertex count {host.n}")
        host_deg = host.degrees()
        for v, t in enumerate(target):
            if t > host_deg[v]:
                raise ValueError(
                    f"target degree {t} at vertex {v} exceeds host degree {host_deg[v]}"
                )
        self.host = host
        self.target = target

    @property
    def n(self) -> int:
        return self.host.n

    def key(self) -> tuple:
        """Hashable identity used for memoised enumeration."""
        return (self.host.n, tuple(self.host.sorted_edges()), self.target.values)

    def __eq__(self, other) -> bool:
        return isinstance(other, HostedFactorSpec) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"HostedFactorSpec(host={self.host!r}, target={self.target!r})"


def simplify(m: MultiGraph) -> SimpleGraph:
    """Replace every multiple edge by a single edge."""
    return m.simplified()


def complement(g: SimpleGraph) -> SimpleGraph:
    """The complement within the complete graph on the same vertices."""
    out = SimpleGraph(g.n)
    out._edges = {e for e in all_pairs(g.n) if e not in g._edges}
    return out


def complement_in(host: SimpleGraph, g: SimpleGraph) -> SimpleGraph:
    """Edges of ``host`` not in ``g``; requires g to be a subgraph of host."""
    if host.n != g.n:
        raise ValueError(f"vertex counts differ: {host.n} != {g.n}")
    stray = g._edges - host._edges
    if stray:
        raise ValueError(f"not a subgraph of the host: extra edges {sorted(stray)}")
    out = SimpleGraph(host.n)
    out._edges = host._edges - g._edges
    return out


def union(a: SimpleGraph, b: SimpleGraph) -> SimpleGraph:
    if a.n != b.n:
        raise ValueError(f"vertex counts differ: {a.n} != {b.n}")
    out = SimpleGraph(a.n)
    out._edges = a._edges | b._edges
    return out


def is_subgraph(a: SimpleGraph, b: SimpleGraph) -> bool:
    """True iff every edge of ``a`` is an edge of ``b``."""
    if a.n != b.n:
        raise ValueError(f"vertex counts differ: {a.n} != {b.n}")
    return a._edges <= b._edges


def degree_sequence_of(g: SimpleGraph) -> DegreeSequence:
    return DegreeSequence(g.degrees())


def residual_degrees(target: DegreeSequence, current: SimpleGraph) -> DegreeSequence:
    """Componentwise ``target - degrees(current)``.

    A negative entry means the current graph has already overshot the
    target at some vertex, which the coupling must never allow.
    """
    if target.n != current.n:
        raise ValueError(f"vertex counts differ: {target.n} != {current.n}")
    deg = current.degrees()
    resid = []
    for v, t in enumerate(target):
        r = t - deg[v]
        if r < 0:
            raise InfeasibleState(
                f"vertex {v} has degree {deg[v]} exceeding target {t}"
            )
        resid.append(r)
    return DegreeSequence(resid)
