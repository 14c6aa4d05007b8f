import math

import pytest

from graphsandwich import (
    ZetaOutOfRange,
    select_params,
    solve_mean_steps_stage1,
    solve_mean_steps_stage2,
    thinning_stage1,
    thinning_stage2,
    validate_constraints,
)
from graphsandwich.params import case1_formulas, case2_formulas, case_boundary, pair_count


def test_stage1_mean_zero_degree():
    assert solve_mean_steps_stage1(10, 0, 0.1) == 0.0


def test_stage1_mean_closed_form():
    # p0 = 0.9 * 15/45 = 0.3, mean = -45 log(0.7)
    mu = solve_mean_steps_stage1(10, 3, 0.1)
    assert mu == pytest.approx(-45 * math.log(0.7), rel=1e-15)
    assert mu == pytest.approx(16.05037247724296, rel=1e-12)


def test_stage1_round_trip():
    for n, d, s in [(10, 3, 0.1), (6, 3, 0.2), (5, 2, 0.2), (40, 11, 0.05)]:
        mu = solve_mean_steps_stage1(n, d, s)
        p0 = (1 - s) * (d * n / 2) / pair_count(n)
        assert abs((1 - math.exp(-mu / pair_count(n))) - p0) <= 1e-12


def test_stage1_mean_rejects_saturated_density():
    with pytest.raises(ValueError):
        solve_mean_steps_stage1(4, 3, 0.0)  # density exactly 1


def test_stage2_mean():
    assert solve_mean_steps_stage2(10, 1.0) == 0.0
    mu = solve_mean_steps_stage2(10, 0.5)
    assert mu == pytest.approx(45 * math.log(2), rel=1e-15)
    assert abs(math.exp(-mu / 45) - 0.5) <= 1e-12
    with pytest.raises(ValueError):
        solve_mean_steps_stage2(10, 0.0)
    with pytest.raises(ValueError):
        solve_mean_steps_stage2(10, 1.5)


def test_thinning_formulas():
    assert thinning_stage1(0.02, 10.0) == pytest.approx(0.2)
    with pytest.raises(ZetaOutOfRange):
        thinning_stage1(0.2, 10.0)  # 2.0
    assert thinning_stage2(10, 0.5, 10**4, 10.0) == pytest.approx(0.02)
    with pytest.raises(ZetaOutOfRange) as exc:
        thinning_stage2(1000, 0.01, 1000, 10.0)
    assert exc.value.value == pytest.approx(1000.0)


def test_select_params_case1_example():
    sp = select_params(10**6, 10**4)
    assert sp.case == 1
    expected = (math.log(10**6) / 10**4) ** (1 / 3)
    assert sp.slack1 == pytest.approx(expected, rel=1e-12)
    assert sp.slack1 == pytest.approx(0.1113753238074427, rel=1e-9)


def test_select_params_case2_example():
    sp = select_params(10**6, 10**5)
    assert sp.case == 2
    assert sp.slack1 == pytest.approx(0.1, rel=1e-12)
    assert sp.inflation == pytest.approx(math.sqrt(10), rel=1e-12)
    assert sp.exponent == pytest.approx(2 / 3, rel=1e-12)


def test_case_boundary_identity():
    # at d = (n^3 log n)^(1/4) both slack recipes coincide
    for n in (10**5, 10**8, 10**11):
        d = case_boundary(n)
        a, _, _ = case1_formulas(n, d)
        b, _, _ = case2_formulas(n, d)
        assert abs(a - b) <= 1e-12 * a


def test_select_params_total_and_flagged():
    sp = select_params(100, 99)
    assert sp.inside_validity_window is False  # d = O(n/sqrt(log n)) violated
    sp = select_params(6, 3)
    assert sp.runnable is False  # desk scale: thinning far outside (0,1)
    with pytest.raises(ValueError):
        select_params(2, 1)
    with pytest.raises(ValueError):
        select_params(10, 0)


def test_validate_constraints_desk_scale_fails_honestly():
    sp = select_params(10**6, 10**4)
    rep = validate_constraints(10**6, 10**4, sp.slack1, sp.inflation, sp.exponent)
    by_name = {c.name: c for c in rep.checks}
    first = by_name["slack1*d >= log^4 n"]
    assert first.lhs == pytest.approx(sp.slack1 * 10**4)
    assert first.passed is False  # ~1114 vs ~36430
    assert rep.satisfied is False


def test_validate_constraints_o_relations_have_no_verdict():
    sp = select_params(10**6, 10**4)
    rep = validate_constraints(10**6, 10**4, sp.slack1, sp.inflation, sp.exponent)
    verdicts = {c.name: c.passed for c in rep.checks}
    assert verdicts["slack1*inflation = o(1)"] is None
    assert verdicts["(slack1*d)^(-1/3) = O(exponent)"] is None
    assert len(rep.checks) == 8


def test_validate_constraints_directional_improvement():
    # the slack1*d / log^4 n ratio grows with n along d = log^7 n
    vals = []
    for n in (10**6, 10**8):
        d = math.log(n) ** 7
        s1, f, sg = case1_formulas(n, d)
        rep = validate_constraints(n, d, s1, f, sg)
        vals.append({c.name: c.ratio for c in rep.checks}["slack1*d >= log^4 n"])
    assert vals[1] > vals[0]


def test_validate_constraints_rejects_nonpositive():
    with pytest.raises(ValueError):
        validate_constraints(10, 2, -0.1, 1.0, 0.5)
