"""Closed-form parameter computations for the two-stage scheme.

Everything here is pure arithmetic: Poisson-mean solvers that hit a target
edge density, thinning probabilities for both stages, the two asymptotic
parameter recipes (with their case split), and a numeric evaluator for the
constraint system those recipes are meant to satisfy.

``log`` means the natural logarithm throughout.  Asymptotic dominance has
no finite-n truth value, so the evaluator reports ratios and applies a
configurable threshold instead of pretending.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ZetaOutOfRange

DEFAULT_SAFETY = 10.0
DEFAULT_RATIO_THRESHOLD = 10.0


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def solve_mean_steps_stage1(n: int, d: int, slack1: float) -> float:
    """Poisson mean whose per-pair hit rate matches a (1 - slack1) fraction
    of the d-regular edge density.

    Solves (1 - slack1) * (dn/2) / C(n,2) = 1 - exp(-mean / C(n,2)).
    """
    npairs = pair_count(n)
    p0 = (1.0 - slack1) * (d * n / 2.0) / npairs
    if p0 >= 1.0:
        raise ValueError(f"target density {p0} >= 1; no finite Poisson mean exists")
    if p0 < 0.0:
        raise ValueError(f"target density {p0} < 0")
    return -npairs * math.log1p(-p0)


def solve_mean_steps_stage2(n: int, slack2: float) -> float:
    """Poisson mean that leaves a ``slack2`` fraction of pairs uncovered.

    Solves 1 - slack2 = 1 - exp(-mean / C(n,2)), i.e. mean = -C(n,2) log(slack2).
    """
    if not 0.0 < slack2 <= 1.0:
        raise ValueError(f"slack2={slack2} outside (0, 1]")
    return -pair_count(n) * math.log(slack2)


def thinning_stage1(slack1: float, safety: float = DEFAULT_SAFETY) -> float:
    """Stage-1 thinning probability: safety * slack1; must land in (0, 1)."""
    z = safety * slack1
    if not 0.0 < z < 1.0:
        raise ZetaOutOfRange(z)
    return z


def thinning_stage2(
    max_deficit: float, slack2: float, n: int, safety: float = DEFAULT_SAFETY
) -> float:
    """Stage-2 thinning probability: safety * max_deficit / (slack2 * n)."""
    z = safety * max_deficit / (slack2 * n)
    if not 0.0 < z < 1.0:
        raise ZetaOutOfRange(z)
    return z


def case1_formulas(n: float, d: float) -> tuple[float, float, float]:
    """(slack1, inflation, exponent) for the moderately sparse regime."""
    ln = math.log(n)
    slack1 = (ln / d) ** (1.0 / 3.0)
    lld = math.log(math.log(d)) if d > 1 else float("-inf")
    inflation = d ** (1.0 / 3.0) * ln ** (-4.0 / 3.0) * lld
    exponent = (2.0 / 3.0) * math.log(d) / ln
    return slack1, inflation, exponent


def case2_formulas(n: float, d: float) -> tuple[float, float, float]:
    """(slack1, inflation, exponent) for the denser regime."""
    slack1 = d / n
    inflation = math.sqrt(n / d)
    exponent = math.log(d * d / n) / math.log(n)
    return slack1, inflation, exponent


def case_boundary(n: float) -> float:
    """Degree at which the two recipes agree: (n^3 log n)^(1/4)."""
    return (n**3 * math.log(n)) ** 0.25


@dataclass
class StageParams:
    """All derived parameters for one (n, d) configuration.

    ``slack2`` and the stage-2 quantities are planned from the a-priori
    deficit estimate slack1 * d; the scheme recomputes the stage-2 thinning
    from the realised deficit after stage 1.  Raw values may be unrunnable
    (thinning outside (0,1)); ``runnable`` says so.
    """

    n: int
    d: int
    slack1: float
    slack2: float
    inflation: float
    exponent: float
    safety: float
    mean_steps1: float
    mean_steps2: float | None
    thinning1: float
    thinning2: float
    upper_density2: float  # planned q2 = inflation * deficit / n
    case: int
    inside_validity_window: bool
    runnable: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "xi1": self.slack1,
            "xi": self.slack2,
            "f": self.inflation,
            "sigma": self.exponent,
            "C": self.safety,
            "mu1": self.mean_steps1,
            "mu2": self.mean_steps2,
            "zeta1": self.thinning1,
            "zeta2": self.thinning2,
            "q2": self.upper_density2,
            "case": self.case,
            "insideValidityWindow": self.inside_validity_window,
            "runnable": self.runnable,
        }


def select_params(n: int, d: int, safety: float = DEFAULT_SAFETY) -> StageParams:
    """The case-appropriate parameter recipe for (n, d).

    Total for d >= 2; values may be unrunnable at desk scale, which the
    ``runnable`` flag reports instead of raising.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    if not 1 <= d <= n - 1:
        raise ValueError(f"need 1 <= d <= n-1, got d={d}")
    ln = math.log(n)
    if d <= case_boundary(n):
        case = 1
        slack1, inflation, exponent = case1_formulas(n, d)
    else:
        case = 2
        slack1, inflation, exponent = case2_formulas(n, d)
    deficit_estimate = slack1 * d
    slack2 = safety * inflation * deficit_estimate / n
    thin1 = safety * slack1
    thin2 = safety * deficit_estimate / (slack2 * n) if slack2 > 0 else float("inf")
    p0 = (1.0 - slack1) * (d * n / 2.0) / pair_count(n)
    mean1 = -pair_count(n) * math.log1p(-p0) if 0.0 <= p0 < 1.0 else float("nan")
    mean2 = (
        solve_mean_steps_stage2(n, slack2) if 0.0 < slack2 <= 1.0 else None
    )
    window = (ln**7 <= d) and (d <= n / math.sqrt(ln))
    runnable = (
        0.0 < thin1 < 1.0
        and 0.0 < thin2 < 1.0
        and 0.0 < slack2 < 1.0
        and not math.isnan(mean1)
    )
    return StageParams(
        n=n,
        d=d,
        slack1=slack1,
        slack2=slack2,
        inflation=inflation,
        exponent=exponent,
        safety=safety,
        mean_steps1=mean1,
        mean_steps2=mean2,
        thinning1=thin1,
        thinning2=thin2,
        upper_density2=inflation * deficit_estimate / n,
        case=case,
        inside_validity_window=window,
        runnable=runnable,
    )


@dataclass
class ConstraintCheck:
    """One evaluated relation from the parameter constraint system.

    ``passed`` is None for order-of-magnitude relations (o/O), which are
    reported as ratios but carry no finite-n pass/fail meaning.
    """

    name: str
    relation: str
    lhs: float
    rhs: float
    ratio: float
    passed: bool | None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "relation": self.relation,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "passed": self.passed,
        }


@dataclass
class ConstraintReport:
    checks: list[ConstraintCheck] = field(default_factory=list)
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD

    @property
    def satisfied(self) -> bool:
        """True iff every relation with a pass/fail meaning passed."""
        return all(c.passed for c in self.checks if c.passed is not None)

    def to_dict(self) -> dict:
        return {
            "ratioThreshold": self.ratio_threshold,
            "satisfied": self.satisfied,
            "checks": [c.to_dict() for c in self.checks],
        }


def validate_constraints(
    n: float,
    d: float,
    slack1: float,
    inflation: float,
    exponent: float,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
) -> ConstraintReport:
    """Numerically evaluate the constraint system behind the recipes.

    Hard inequalities pass iff lhs >= rhs.  Dominance (>>) passes iff
    lhs/rhs >= ratio_threshold.  o(.)/O(.) relations are reported as
    ratios with ``passed = None``.
    """
    if min(n, d, slack1, inflation, exponent) <= 0:
        raise ValueError("all inputs must be positive")
    ln = math.log(n)
    r = ConstraintReport(ratio_threshold=ratio_threshold)

    def add(name, relation, lhs, rhs, passed):
        ratio = lhs / rhs if rhs != 0 else math.inf
        r.checks.append(ConstraintCheck(name, relation, lhs, rhs, ratio, passed))

    lhs = slack1 * d
    add("slack1*d >= log^4 n", ">=", lhs, ln**4, lhs >= ln**4)
    add("slack1*n >= d", ">=", slack1 * n, d, slack1 * n >= d)
    rhs = slack1**-3 * ln
    add("d >= slack1^-3 log n", ">=", d, rhs, d >= rhs)
    add("slack1*inflation = o(1)", "o", slack1 * inflation, 1.0, None)
    add(
        "(slack1*d)^(-1/3) = O(exponent)",
        "O",
        (slack1 * d) ** (-1.0 / 3.0),
        exponent,
        None,
    )
    add(
        "log(n/(slack1*d)) = o(exponent*inflation)",
        "o",
        math.log(n / (slack1 * d)),
        exponent * inflation,
        None,
    )
    lhs = inflation * slack1 * d
    rhs = n**exponent
    add("inflation*slack1*d >> n^exponent", ">>", lhs, rhs, lhs / rhs >= ratio_threshold)
    lhs = n**exponent
    rhs = ln**3 / math.log(ln) ** 2
    add(
        "n^exponent >> log^3 n / loglog^2 n",
        ">>",
        lhs,
        rhs,
        lhs / rhs >= ratio_threshold,
    )
    return r
