from fractions import Fraction

import math
import numpy as np
import pytest

from posopt import DomainError, GameDefinition, InvalidGame, PureProfile, counts, pure_utilities, win_shares
from posopt.instances import ForecastingM2, NonExtremePair, build


def test_unique_minimizer_takes_target():
    game = build(NonExtremePair(grid=11))
    assert win_shares(game, PureProfile((0.0, 1.0)), 1.0) == [0, 1]


def test_colocated_minimizers_split_evenly(two_sites):
    assert win_shares(two_sites, PureProfile(("a", "a", "a")), "a") == [Fraction(1, 3)] * 3


def test_forecasting_square_split_between_singletons():
    game = build(ForecastingM2(0.9, 0.4, 8))
    prof = PureProfile(((0, 1), (1, 0), (1, 1), (1, 1)))
    assert win_shares(game, prof, "x2") == [Fraction(1, 2), Fraction(1, 2), 0, 0]


def test_unknown_target_rejected(two_sites):
    with pytest.raises(DomainError):
        win_shares(two_sites, PureProfile(("a",)), "zzz")


def test_unknown_position_rejected(two_sites):
    with pytest.raises(DomainError):
        pure_utilities(two_sites, PureProfile(("a", "q")))


def test_utilities_colocated_pair():
    game = build(NonExtremePair(grid=11))
    assert pure_utilities(game, PureProfile((0.5, 0.5))) == (0.5, 0.5)


def test_utilities_each_covers_one_target():
    game = build(NonExtremePair(grid=11))
    assert pure_utilities(game, PureProfile((0.0, 1.0))) == (0.5, 0.5)


def test_utilities_match_mass_over_count(two_sites):
    prof = PureProfile.from_counts(("a", "b"), (2, 5))
    u = pure_utilities(two_sites, prof)
    assert u[:2] == pytest.approx((0.15, 0.15), abs=1e-15)
    assert u[2:] == pytest.approx((0.14,) * 5, abs=1e-15)
    assert math.fsum(u) == pytest.approx(1.0, abs=1e-12)


def test_counts():
    assert counts(PureProfile(("a", "a", "b"))) == {"a": 2, "b": 1}
    assert counts(PureProfile(("a",))) == {"a": 1}
    assert counts(PureProfile(())) == {}


def test_profile_counts_agree_with_positions():
    prof = PureProfile.from_counts(("x", "y", "z"), (3, 0, 2))
    assert prof.positions == ("x", "x", "x", "z", "z")
    assert prof.counts == {"x": 3, "z": 2}
    assert sum(prof.counts.values()) == prof.n


def test_empty_profile_has_no_utilities(two_sites):
    with pytest.raises(DomainError):
        pure_utilities(two_sites, PureProfile(()))


@pytest.mark.parametrize(
    "masses",
    [[0.5, 0.6], [-0.1, 1.1], [float("nan"), 1.0]],
)
def test_invalid_masses(masses):
    with pytest.raises(InvalidGame):
        GameDefinition.finite(["a", "b"], ["a", "b"], masses, [[0, 1], [1, 0]])


def test_negative_distance_rejected():
    with pytest.raises(InvalidGame):
        GameDefinition.finite(["a"], ["t"], [1.0], [[-1.0]])


def test_infinite_distance_allowed():
    game = GameDefinition.finite(["a", "b"], ["s", "t"], [0.5, 0.5], [[0, math.inf], [math.inf, 0]])
    assert pure_utilities(game, PureProfile(("a", "b"))) == (0.5, 0.5)
    # nobody reaches t: everyone ties at infinity
    assert pure_utilities(game, PureProfile(("a", "a"))) == (0.5, 0.5)


def test_callable_distances():
    game = GameDefinition.finite([0, 1, 2], [0, 2], [0.5, 0.5], lambda x, y: abs(x - y))
    assert game.proximity(1, 2) == 1.0
    assert pure_utilities(game, PureProfile((1, 2))) == (0.5, 0.5)


def test_graph_shortest_paths(path3):
    assert path3.proximity("a", "c") == 2.0
    assert path3.tie_tol == 0.0


def test_graph_zero_weight_edge():
    g = GameDefinition.graph(["a", "b", "c"], [("a", "b", 0), ("b", "c", 2.5)], [0.2, 0.3, 0.5])
    assert g.proximity("a", "b") == 0.0
    assert g.proximity("a", "c") == 2.5
    assert g.tie_tol == 1e-12


def test_graph_disconnected_is_infinite():
    g = GameDefinition.graph(["a", "b"], [], [0.5, 0.5])
    assert g.proximity("a", "b") == math.inf


def test_geometric_metrics():
    pts = [[0.0, 0.0], [1.0, 1.0]]
    for metric, d in [("euclidean", math.sqrt(2)), ("manhattan", 2.0), ("chebyshev", 1.0)]:
        g = GameDefinition.geometric(["o", "i"], [0.5, 0.5], pts, metric=metric)
        assert g.proximity((0.0, 0.0), "i") == pytest.approx(d)


def test_geometric_domain_enforced():
    g = GameDefinition.geometric(["o"], [1.0], [[0.2]])
    with pytest.raises(DomainError):
        g.normalize(1.5)


def test_geometric_target_outside_domain():
    with pytest.raises(InvalidGame):
        GameDefinition.geometric(["o"], [1.0], [[2.0]])


def test_game_table_is_read_only(two_sites):
    with pytest.raises(ValueError):
        two_sites.table[0, 0] = 5.0


def test_restrict_keeps_distances(path3):
    sub = path3.restrict(["a", "c"])
    assert sub.kind == "finite"
    assert np.array_equal(sub.table, path3.table[[0, 2]])
