import math
from fractions import Fraction

import numpy as np
import pytest

from posopt import (
    BudgetExceeded,
    DomainError,
    GameDefinition,
    MixedStrategy,
    OutOfRange,
    big_g,
    big_g_inverse,
    check_mixed_bounds,
    coverage_probability,
    e1_direct_sum,
    exact_symmetric_utility,
    fig6_curve,
    g_lower,
    gbar,
    mc_symmetric_utility,
    project,
    solve_two_point,
    union_bound_coverage,
    verify_symmetric,
)
from posopt.mixed import exact_share_moments, mixed_threshold, two_point_game


def binom_pmf(k, n, s):
    return math.comb(n, k) * s**k * (1 - s) ** (n - k)


def test_g_lower_limits():
    assert g_lower(0.37, 0.0, 5) == 0.37
    assert g_lower(0.37, 1.0, 5) == pytest.approx(1 / 5, abs=1e-15)


def test_g_lower_against_binomial_sum():
    direct = 0.5 * sum(binom_pmf(k, 9, 0.5) / (k + 1) for k in range(9)) + 0.5**9 / 10
    assert g_lower(0.5, 0.5, 10) == pytest.approx(direct, abs=1e-15)


def test_e1_direct_sum_values():
    assert e1_direct_sum(1.0, 0.5, 2) == 0.75
    assert e1_direct_sum(0.4, 1.0, 6) == pytest.approx(1 / 6)


@pytest.mark.parametrize("n", [2, 3, 7, 30])
def test_g_lower_matches_oracle(n):
    for p in np.linspace(0, 1, 11):
        for s in np.linspace(0.01, 0.99, 99):
            assert abs(g_lower(p, s, n) - e1_direct_sum(p, s, n)) <= 1e-12


def test_g_lower_stable_for_tiny_sigma():
    assert g_lower(0.3, 1e-14, 50) == pytest.approx(0.3, rel=1e-10)


def test_big_g_values():
    for n in range(2, 51):
        assert big_g(0.5, n) == pytest.approx(0.5, abs=1e-12)
    assert big_g(0.0, 7) == 1 / 7
    assert big_g(1.0, 7) == 1 - 1 / 7
    assert big_g(0.9, 3) == pytest.approx(0.171 / 0.27, abs=1e-12)
    assert big_g(1e-9, 7) == pytest.approx(1 / 7, abs=1e-8)


@pytest.mark.parametrize("n", [3, 4, 10, 50])
def test_big_g_increasing_and_symmetric(n):
    s = np.linspace(0.001, 0.999, 2000)
    g = np.array([big_g(v, n) for v in s])
    assert np.all(np.diff(g) > 0)
    assert np.allclose(g + np.array([big_g(1 - v, n) for v in s]), 1.0, atol=1e-12)


def test_big_g_constant_for_two_players():
    assert {big_g(s, 2) for s in np.linspace(0, 1, 101)} == {0.5}


def test_inverse():
    assert big_g_inverse(0.5, 9) == pytest.approx(0.5, abs=1e-12)
    assert big_g_inverse(1 / 9, 9) == 0.0
    assert big_g_inverse(8 / 9, 9) == 1.0
    with pytest.raises(OutOfRange):
        big_g_inverse(0.05, 9)
    with pytest.raises(DomainError):
        big_g_inverse(0.5, 9, tol=0)


@pytest.mark.parametrize("n", [3, 5, 20])
def test_inverse_roundtrip(n):
    for s in np.linspace(0.02, 0.98, 49):
        assert abs(big_g_inverse(big_g(s, n), n) - s) <= 1e-9
        assert abs(big_g(big_g_inverse(big_g(s, n), n), n) - big_g(s, n)) <= 2e-12


def test_gbar():
    assert gbar(0.5, 10) == pytest.approx((0.5 - 2**-10 - 0.05) / (1 - 2 * 2**-10), abs=1e-15)
    for s in np.linspace(0.05, 0.95, 19):
        denom = 1 - s**7 - (1 - s) ** 7
        assert gbar(s, 7) == pytest.approx(big_g(s, 7) - (s / 7) / denom, abs=1e-13)


def test_gbar_increasing_on_restricted_interval():
    n = 13
    hi = 1 - 1 / math.sqrt(n) + 1 / n
    s = np.linspace(0, hi, 1002)[1:-1]
    assert np.all(np.diff([gbar(v, n) for v in s]) > 0)


def test_solve_two_point():
    for n in (3, 10, 40):
        assert solve_two_point(0.5, n) == pytest.approx(0.5, abs=1e-12)
    assert solve_two_point(0.99, 10) == 1.0
    assert solve_two_point(0.05, 10) == 0.0
    assert solve_two_point(0.1, 10) == 0.0
    assert solve_two_point(0.9, 10) == 1.0


def test_two_point_indifference():
    s = solve_two_point(0.7, 10)
    game = two_point_game(0.7)
    sigma = MixedStrategy(("x1", "x2"), (s, 1 - s))
    for x in ("x1", "x2"):
        assert exact_symmetric_utility(game, x, sigma, 10) == pytest.approx(0.1, abs=1e-9)


def test_exact_utility_point_mass():
    game = two_point_game(0.3)
    assert exact_symmetric_utility(game, "x1", MixedStrategy(("x1",), (1.0,)), 6) == pytest.approx(1 / 6, abs=1e-15)


def test_exact_utility_matches_closed_form_without_third_event():
    game = two_point_game(0.6)
    sigma = MixedStrategy(("x1", "x2"), (0.6, 0.4))
    assert exact_symmetric_utility(game, "x1", sigma, 3) == pytest.approx(g_lower(0.6, 0.6, 3), abs=1e-15)


def test_exact_utility_budget():
    game = GameDefinition.graph(list("abcd"), [], [0.25] * 4)
    sigma = MixedStrategy(tuple("abcd"), (0.25,) * 4)
    with pytest.raises(BudgetExceeded):
        exact_symmetric_utility(game, "a", sigma, 40, budget=100)


def test_average_utility_is_one_over_n():
    game = GameDefinition.finite(list("abc"), ["s", "t"], [0.4, 0.6], [[0, 2], [1, 1], [2, 0]])
    sigma = MixedStrategy(tuple("abc"), (0.2, 0.5, 0.3))
    total = sum(w * exact_symmetric_utility(game, x, sigma, 7) for x, w in zip(sigma.support, sigma.weights))
    assert total == pytest.approx(1 / 7, abs=1e-12)


def test_share_moments():
    game = two_point_game(0.3)
    sigma = MixedStrategy(("x1", "x2"), (0.4, 0.6))
    mean, second = exact_share_moments(game, "x1", sigma, 6)
    assert mean == pytest.approx(exact_symmetric_utility(game, "x1", sigma, 6), abs=1e-14)
    assert mean * mean <= second <= mean


def test_mc_point_mass_exact():
    game = two_point_game(0.3)
    est, se = mc_symmetric_utility(game, "x1", MixedStrategy(("x1",), (1.0,)), 6, 5000, 3)
    assert est == 1 / 6 and se == 0.0


def test_mc_deterministic_and_thread_independent(monkeypatch):
    game = two_point_game(0.3)
    sigma = MixedStrategy(("x1", "x2"), (0.4, 0.6))
    args = (game, "x1", sigma, 6, 200_000, 11)
    monkeypatch.setenv("POSOPT_THREADS", "1")
    one = mc_symmetric_utility(*args)
    monkeypatch.setenv("POSOPT_THREADS", "4")
    assert mc_symmetric_utility(*args) == one
    exact = exact_symmetric_utility(game, "x1", sigma, 6)
    assert abs(one[0] - exact) <= 4 * one[1]


def test_mc_rejects_zero_samples():
    with pytest.raises(DomainError):
        mc_symmetric_utility(two_point_game(0.3), "x1", MixedStrategy(("x1",), (1.0,)), 3, 0)


def test_coverage_simple():
    assert coverage_probability([0.5, 0.5], 2) == (0.5, None)
    assert coverage_probability([Fraction(1, 2)] * 2, 2) == (Fraction(1, 2), None)
    assert coverage_probability([Fraction(1, 3)] * 3, 2)[0] == 0
    assert coverage_probability([1.0, 0.0], 5)[0] == 0.0


def test_coverage_half_half_sixty():
    cov, _ = coverage_probability([Fraction(1, 2)] * 2, 60)
    assert cov >= 1 - Fraction(1, 3600)
    assert cov == 1 - Fraction(2, 2**60)


def test_coverage_dominates_union_bound():
    rng = np.random.default_rng(5)
    for _ in range(50):
        w = rng.dirichlet(np.ones(int(rng.integers(2, 6))))
        n = int(rng.integers(2, 30))
        assert coverage_probability(list(w), n - 1)[0] >= union_bound_coverage(list(w), n - 1) - 1e-12


def test_coverage_monte_carlo_agrees():
    w = [0.3, 0.3, 0.4]
    exact, _ = coverage_probability(w, 5)
    est, se = coverage_probability(w, 5, "mc", samples=100_000, seed=4)
    assert abs(est - exact) <= 4 * se


def test_coverage_large_support_defaults_to_mc():
    w = [1 / 25] * 25
    est, se = coverage_probability(w, 200, samples=2000, seed=1)
    assert se is not None and 0 <= est <= 1


def test_mixed_bounds_two_point():
    s = solve_two_point(0.7, 50)
    ps = project(two_point_game(0.7))
    rep = check_mixed_bounds(ps, MixedStrategy.on(ps, (s, 1 - s)), 50)
    assert rep.bounds_hold and rep.extreme
    assert rep.threshold == pytest.approx(32 / 0.3 * math.log(1 / 0.3))
    assert not rep.clears_threshold


def test_mixed_bounds_exact_p_and_violation():
    ps = project(two_point_game(0.5))
    assert check_mixed_bounds(ps, MixedStrategy.on(ps, (0.5, 0.5)), 50).bounds_hold
    rep = check_mixed_bounds(ps, MixedStrategy.on(ps, (1.0, 0.0)), 50)
    assert not rep.positions[0].upper_ok
    assert not rep.bounds_hold
    assert rep.coverage == 0.0


def test_threshold_formula():
    p0 = 0.05
    assert mixed_threshold(p0) == pytest.approx(32 / p0 * math.log(1 / p0))
    assert mixed_threshold(0.9) == 43.0


def test_verify_symmetric():
    s = solve_two_point(0.7, 10)
    game = two_point_game(0.7)
    rep = verify_symmetric(game, MixedStrategy(("x1", "x2"), (s, 1 - s)), 10)
    assert rep.is_equilibrium and rep.value == pytest.approx(0.1, abs=1e-12)
    bad = verify_symmetric(game, MixedStrategy(("x1", "x2"), (0.2, 0.8)), 10)
    assert not bad.is_equilibrium and bad.best_deviation == "x1"


def test_curve():
    rows = fig6_curve([10, 5], 11)
    assert len(rows) == 22
    assert rows[0] == (5, 0.0, 0.0) and rows[-1] == (10, 1.0, 1.0)
    assert [r[0] for r in rows] == sorted(r[0] for r in rows)
    with pytest.raises(DomainError):
        fig6_curve([5], 1)


def test_mixed_strategy_validation():
    with pytest.raises(DomainError):
        MixedStrategy(("a", "a"), (0.5, 0.5))
    with pytest.raises(DomainError):
        MixedStrategy(("a", "b"), (0.5, 0.6))
    with pytest.raises(DomainError):
        MixedStrategy(("a", "b"), (1.5, -0.5))
