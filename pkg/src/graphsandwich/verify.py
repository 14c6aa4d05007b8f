"""Statistical verification: chi-square tests over exactly enumerated
supports, per-pair binomial margin checks, pairwise independence scans,
containment/fallback rate accounting, and estimator deviation reports.

Every test is driven by an explicit RngStream, so reported p-values are
reproducible bit-identically under the same master seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .edgeprob import EstimatorHandle, conditional_edge_prob
from .graphs import Edge, HostedFactorSpec, SimpleGraph, all_pairs
from .sampling import RngStream
from .scheme import SandwichResult

MIN_EXPECTED_CELL = 5.0


@dataclass
class DistributionTestReport:
    support_size: int
    trials: int
    chi_square: float
    degrees_of_freedom: int
    p_value: float
    min_expected_cell: float

    def to_dict(self) -> dict:
        return {
            "supportSize": self.support_size,
            "trials": self.trials,
            "chiSquare": self.chi_square,
            "degreesOfFreedom": self.degrees_of_freedom,
            "pValue": self.p_value,
            "minExpectedCell": self.min_expected_cell,
        }


@dataclass
class IndependenceReport:
    pairs_tested: int
    max_abs_correlation: float
    mean_abs_correlation: float

    def to_dict(self) -> dict:
        return {
            "pairsTested": self.pairs_tested,
            "maxAbsCorrelation": self.max_abs_correlation,
            "meanAbsCorrelation": self.mean_abs_correlation,
        }


def graph_key(g: SimpleGraph) -> tuple:
    """Canonical identity of a labelled graph (no isomorphism reduction)."""
    return tuple(g.sorted_edges())


def exact_distribution_test(
    sampler: Callable[[RngStream], SimpleGraph],
    support: Sequence[SimpleGraph],
    trials: int,
    rng: RngStream,
    weights: Sequence[float] | None = None,
) -> DistributionTestReport:
    """Chi-square of sampled graphs against a fully enumerated support.

    The null is uniform unless explicit target weights are given.  The
    sampler receives a fresh child stream per trial (child streams derive
    from seeds, not from consumption, so reusing one stream across calls
    would replay the same draw).  A sample outside the support is a hard
    failure: it means the sampler's support, not just its weights, is
    wrong.
    """
    if not support:
        raise ValueError("support must be nonempty")
    if trials / len(support) < MIN_EXPECTED_CELL:
        raise ValueError(
            f"{trials} trials over {len(support)} outcomes leaves expected "
            f"cells below {MIN_EXPECTED_CELL}"
        )
    index = {graph_key(g): i for i, g in enumerate(support)}
    if len(index) != len(support):
        raise ValueError("support contains duplicate graphs")
    if weights is None:
        probs = np.full(len(support), 1.0 / len(support))
    else:
        w = np.asarray(weights, dtype=float)
        if len(w) != len(support) or (w <= 0).any():
            raise ValueError("weights must be positive, one per support element")
        probs = w / w.sum()
    counts = np.zeros(len(support), dtype=np.int64)
    for t in range(trials):
        g = sampler(rng.child(t))
        i = index.get(graph_key(g))
        if i is None:
            raise AssertionError(f"sampler produced a graph outside the support: {g!r}")
        counts[i] += 1
    expected = probs * trials
    min_cell = float(expected.min())
    if min_cell < MIN_EXPECTED_CELL:
        raise ValueError(
            f"minimum expected cell {min_cell:.2f} below {MIN_EXPECTED_CELL}; "
            "increase trials"
        )
    chi = float(((counts - expected) ** 2 / expected).sum())
    df = len(support) - 1
    # a singleton support is degenerate: every in-support sample matches
    p = 1.0 if df == 0 else float(_scipy_stats.chi2.sf(chi, df))
    return DistributionTestReport(
        support_size=len(support),
        trials=trials,
        chi_square=chi,
        degrees_of_freedom=df,
        p_value=p,
        min_expected_cell=min_cell,
    )


@dataclass
class EdgeMarginReport:
    trials: int
    target_p: float
    band: float
    frequencies: dict[Edge, float]
    outliers: list[Edge]
    mean_density: float

    @property
    def all_within_band(self) -> bool:
        return not self.outliers


def edge_margin_test(graphs: Sequence[SimpleGraph], target_p: float) -> EdgeMarginReport:
    """Per-pair empirical frequencies against a common binomial target.

    Flags any pair outside target_p +- 4 * sqrt(target_p (1-target_p) / trials).
    """
    if len(graphs) < 1000:
        raise ValueError("need at least 1000 graphs")
    n = graphs[0].n
    pairs = all_pairs(n)
    trials = len(graphs)
    counts = dict.fromkeys(pairs, 0)
    for g in graphs:
        if g.n != n:
            raise ValueError("graphs must share a vertex count")
        for e in g.edge_set():
            counts[e] += 1
    freqs = {e: c / trials for e, c in counts.items()}
    band = 4.0 * math.sqrt(max(target_p * (1.0 - target_p), 0.0) / trials)
    outliers = sorted(e for e, f in freqs.items() if abs(f - target_p) > band)
    mean_density = sum(freqs.values()) / len(pairs) if pairs else 0.0
    return EdgeMarginReport(
        trials=trials,
        target_p=target_p,
        band=band,
        frequencies=freqs,
        outliers=outliers,
        mean_density=mean_density,
    )


def _indicator_matrix(graphs: Sequence[SimpleGraph]) -> np.ndarray:
    n = graphs[0].n
    pairs = all_pairs(n)
    pos = {e: i for i, e in enumerate(pairs)}
    x = np.zeros((len(graphs), len(pairs)), dtype=np.int8)
    for r, g in enumerate(graphs):
        for e in g.edge_set():
            x[r, pos[e]] = 1
    return x


def pairwise_independence_test(
    graphs: Sequence[SimpleGraph],
    other: Sequence[SimpleGraph] | None = None,
) -> IndependenceReport:
    """Sample correlations between edge indicators.

    With one ensemble, all distinct indicator pairs within it; with two,
    all cross pairs (one indicator from each).  Constant indicators carry
    no information and are skipped.
    """
    if len(graphs) < 5000:
        raise ValueError("need at least 5000 graphs")
    x = _indicator_matrix(graphs).astype(np.float64)
    keep_x = np.flatnonzero(x.std(axis=0) > 0)
    if other is None:
        cols = x[:, keep_x]
        if cols.shape[1] < 2:
            return IndependenceReport(0, 0.0, 0.0)
        corr = np.corrcoef(cols.T)
        iu = np.triu_indices(cols.shape[1], k=1)
        vals = np.abs(corr[iu])
    else:
        if len(other) != len(graphs):
            raise ValueError("ensembles must be paired, one graph each per trial")
        y = _indicator_matrix(other).astype(np.float64)
        keep_y = np.flatnonzero(y.std(axis=0) > 0)
        if len(keep_x) == 0 or len(keep_y) == 0:
            return IndependenceReport(0, 0.0, 0.0)
        xc = x[:, keep_x] - x[:, keep_x].mean(axis=0)
        yc = y[:, keep_y] - y[:, keep_y].mean(axis=0)
        num = xc.T @ yc / len(graphs)
        denom = np.outer(xc.std(axis=0), yc.std(axis=0))
        vals = np.abs(num / denom).ravel()
    return IndependenceReport(
        pairs_tested=int(vals.size),
        max_abs_correlation=float(vals.max()) if vals.size else 0.0,
        mean_abs_correlation=float(vals.mean()) if vals.size else 0.0,
    )


@dataclass
class ContainmentRates:
    trials: int
    lower_rate: float
    upper_rate: float
    both_rate: float
    fallback_rate: float

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "containsLowerRate": self.lower_rate,
            "containsUpperRate": self.upper_rate,
            "bothRate": self.both_rate,
            "fallbackRate": self.fallback_rate,
        }


def containment_rate(results: Sequence[SandwichResult]) -> ContainmentRates:
    if not results:
        raise ValueError("need at least one result")
    t = len(results)
    lo = sum(1 for r in results if r.contains_lower)
    up = sum(1 for r in results if r.contains_upper)
    both = sum(1 for r in results if r.contains_lower and r.contains_upper)
    fb = sum(1 for r in results if r.any_fallback)
    return ContainmentRates(t, lo / t, up / t, both / t, fb / t)


@dataclass
class EstimatorDeviationRow:
    spec_key: tuple
    edge: Edge
    exact: float
    heuristic: float
    empirical: float | None

    def relative_deviation(self, value: float) -> float:
        if self.exact > 0:
            return abs(value - self.exact) / self.exact
        return abs(value)


@dataclass
class EstimatorDeviationReport:
    rows: list[EstimatorDeviationRow] = field(default_factory=list)

    def max_heuristic_deviation(self) -> float:
        return max((r.relative_deviation(r.heuristic) for r in self.rows), default=0.0)

    def mean_heuristic_deviation(self) -> float:
        devs = [r.relative_deviation(r.heuristic) for r in self.rows]
        return sum(devs) / len(devs) if devs else 0.0

    def max_empirical_deviation(self) -> float:
        return max(
            (r.relative_deviation(r.empirical) for r in self.rows if r.empirical is not None),
            default=0.0,
        )


def estimator_deviation_report(
    specs: Iterable[HostedFactorSpec],
    empirical_samples: int = 0,
    rng: RngStream | None = None,
) -> EstimatorDeviationReport:
    """Exact vs heuristic (vs empirical) probabilities, edge by edge.

    Quantifies how far the cheap estimates sit from enumerated truth on
    specs small enough to enumerate.
    """
    exact = EstimatorHandle.exact()
    heur = EstimatorHandle.heuristic()
    emp = EstimatorHandle.empirical(empirical_samples) if empirical_samples else None
    report = EstimatorDeviationReport()
    for spec in specs:
        for e in spec.host.sorted_edges():
            row = EstimatorDeviationRow(
                spec_key=spec.key(),
                edge=e,
                exact=conditional_edge_prob(spec, e, exact),
                heuristic=conditional_edge_prob(spec, e, heur),
                empirical=(
                    conditional_edge_prob(spec, e, emp, rng) if emp is not None else None
                ),
            )
            report.rows.append(row)
    return report


def chi_square_power(
    support_size: int, trials: int, weights: Sequence[float], alpha: float
) -> float:
    """Power of the uniform-null chi-square against a weighted alternative."""
    k = support_size
    p1 = np.asarray(weights, dtype=float)
    p1 = p1 / p1.sum()
    p0 = np.full(k, 1.0 / k)
    lam = trials * float(((p1 - p0) ** 2 / p0).sum())
    crit = _scipy_stats.chi2.isf(alpha, k - 1)
    return float(_scipy_stats.ncx2.sf(crit, k - 1, lam))


def write_summary_csv(path, rows: Iterable[tuple[str, float, float, bool]]) -> None:
    """Summary table: one row per test as (name, statistic, threshold, pass)."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        w.writerow(["test", "statistic", "threshold", "pass"])
        for name, stat, thr, ok in rows:
            w.writerow([name, f"{stat:.12g}", f"{thr:.12g}", str(bool(ok)).lower()])
