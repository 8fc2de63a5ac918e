import math

import numpy as np
import pytest

from posopt import InvalidSpec, project
from posopt.instances import (
    SPECS,
    ClassicHotelling,
    FiniteHotelling,
    Forecasting,
    ForecastingM2,
    NonExtremePair,
    SpatialVoting,
    ThreeNode,
    VoronoiGraph,
    build,
    deviation_grid,
    lattice,
    spec_from_params,
)


def test_registry_kinds():
    assert set(SPECS) == {
        "forecasting",
        "finite-hotelling",
        "classic-hotelling",
        "voronoi-graph",
        "spatial-voting",
        "three-node",
        "forecasting-m2",
        "non-extreme-pair",
    }


def test_forecasting_targets_are_hypercube_vertices():
    g = build(Forecasting(2, (0.1, 0.2, 0.3, 0.4), grid=5))
    assert g.targets == ("00", "01", "10", "11")
    assert g.points.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert len(g.deviation_candidates) == 25
    assert g.meta["kind"] == "forecasting"


def test_forecasting_bad_q():
    with pytest.raises(InvalidSpec):
        build(Forecasting(2, (0.5, 0.5)))
    with pytest.raises(InvalidSpec):
        build(Forecasting(1, (0.7, 0.7)))


def test_finite_hotelling():
    g = build(FiniteHotelling(((0.0,), (1.0,)), ((0.1,), (0.8,), (0.9,)), (0.5, 0.25, 0.25)))
    ps = project(g)
    assert ps.pseudo_targets == ("L0", "L1")
    assert ps.p == pytest.approx((0.5, 0.5))


def test_finite_hotelling_ties():
    spec = dict(locations=((0.0,), (1.0,)), consumers=((0.5,), (0.9,)), weights=(0.5, 0.5))
    with pytest.raises(InvalidSpec):
        build(FiniteHotelling(**spec))
    g = build(FiniteHotelling(**spec, tie_policy="allow"))
    from posopt import ConditionViolated

    with pytest.raises(ConditionViolated):
        project(g)


def test_classic_hotelling():
    g = build(ClassicHotelling((0.2, 0.7), (0.4, 0.6), grid=11))
    assert g.targets == (0.2, 0.7)
    assert 0.2 in g.deviation_candidates and 0.5 in g.deviation_candidates
    with pytest.raises(InvalidSpec):
        build(ClassicHotelling((0.2, 1.2), (0.4, 0.6)))
    with pytest.raises(InvalidSpec):
        build(ClassicHotelling((0.2, 0.2), (0.4, 0.6)))


def test_voronoi_graph():
    g = build(VoronoiGraph(("a", "b", "c"), (("a", "b", 1), ("b", "c", 2)), (0.2, 0.3, 0.5)))
    assert g.proximity("a", "c") == 3
    assert g.tie_tol == 0
    with pytest.raises(InvalidSpec):
        build(VoronoiGraph(("a", "b"), (("a", "b", -1),), (0.5, 0.5)))


def test_spatial_voting_aggregates_duplicates():
    g = build(SpatialVoting(((0.1, 0.1), (0.1, 0.1), (0.9, 0.5)), grid=3))
    ps = project(g)
    assert ps.size == 2
    assert sorted(ps.p) == pytest.approx([1 / 3, 2 / 3])
    with pytest.raises(InvalidSpec):
        build(SpatialVoting(((0.1,),), metric="cosine"))


def test_three_node():
    spec = ThreeNode(0.5, 7)
    assert spec.masses() == pytest.approx((1 / 7, 1.5 / 7, 4.5 / 7))
    g = build(spec)
    assert math.fsum(g.masses) == pytest.approx(1.0, abs=1e-12)
    assert g.proximity("x1", "x3") == 2
    with pytest.raises(InvalidSpec):
        build(ThreeNode(0.5, 6))
    with pytest.raises(InvalidSpec):
        build(ThreeNode(0.1, 30))
    with pytest.raises(InvalidSpec):
        build(ThreeNode(0.7, 30))


def test_forecasting_m2():
    spec = ForecastingM2(0.9, 0.1, 40, grid=11)
    g = build(spec)
    assert g.targets == ("x1", "x2", "x3", "x4")
    assert g.points.tolist() == [[0, 1], [0, 0], [1, 0], [1, 1]]
    assert math.fsum(g.masses) == pytest.approx(1.0, abs=1e-12)
    assert all(spec.nonexistence_conditions().values())
    assert not ForecastingM2(0.6, 0.4, 40).nonexistence_conditions()["eps_gap"]
    with pytest.raises(InvalidSpec):
        build(ForecastingM2(0.4, 0.1, 40))
    with pytest.raises(InvalidSpec):
        build(ForecastingM2(0.9, 0.1, 4))


def test_non_extreme_pair():
    g = build(NonExtremePair(grid=11))
    assert g.targets == (0.0, 1.0)
    assert len(g.deviation_candidates) == 11


def test_spec_from_params():
    spec = spec_from_params("three-node", {"eps": 0.5, "n": 7})
    assert spec == ThreeNode(0.5, 7)
    with pytest.raises(InvalidSpec):
        spec_from_params("three-node", {"eps": 0.5})
    with pytest.raises(InvalidSpec):
        spec_from_params("three-node", {"eps": 0.5, "n": 7, "x": 1})
    with pytest.raises(InvalidSpec):
        spec_from_params("nope", {})


def test_deviation_grid_defaults():
    assert len(deviation_grid(NonExtremePair())) == 1001
    assert len(deviation_grid(Forecasting(2, (0.25,) * 4))) == 101**2
    assert len(deviation_grid(Forecasting(3, (0.125,) * 8))) == 21**3


def test_deviation_grid_includes_targets():
    g = build(ClassicHotelling((0.123,), (1.0,), grid=3))
    grid = deviation_grid(g, 3)
    assert grid[:3] == [0.0, 0.5, 1.0] and grid[-1] == 0.123


def test_lattice():
    assert lattice([(0, 1)], 3) == [0.0, 0.5, 1.0]
    assert lattice([(0, 1), (0, 2)], 2) == [(0.0, 0.0), (0.0, 2.0), (1.0, 0.0), (1.0, 2.0)]
    with pytest.raises(InvalidSpec):
        lattice([(0, 1)], 1)


def test_masses_must_sum_to_one():
    with pytest.raises(InvalidSpec):
        build(ClassicHotelling((0.2, 0.7), (0.4, 0.4)))
    with pytest.raises(InvalidSpec):
        build(VoronoiGraph(("a",), (), (float("nan"),)))


def test_params_roundtrip():
    spec = ForecastingM2(0.9, 0.1, 40)
    assert spec_from_params(spec.kind, spec.params()) == spec
    assert np.isclose(sum(spec.masses()), 1.0)
