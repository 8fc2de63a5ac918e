"""Builders for the concrete games: forecasting, Hotelling variants, voting, Voronoi and counterexamples."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, ClassVar, Mapping, Sequence

import numpy as np

from .errors import InvalidGame, InvalidSpec
from .game import METRICS, GameDefinition, _metric_table, as_position

# default lattice points per axis for deviation grids, by dimension
GRID_BY_DIM = {1: 1001, 2: 101}
GRID_HIGH_DIM = 21
HOTELLING_TIE_TOL = 1e-12


def default_resolution(dim: int) -> int:
    return GRID_BY_DIM.get(dim, GRID_HIGH_DIM)


def _check_masses(ws: Sequence[float], what: str) -> list[float]:
    ws = [float(w) for w in ws]
    if any(not math.isfinite(w) or w < 0 for w in ws):
        raise InvalidSpec(f"{what} must be finite and non-negative")
    if abs(math.fsum(ws) - 1.0) > 1e-12:
        raise InvalidSpec(f"{what} sum to {math.fsum(ws)!r}, not 1")
    return ws


def lattice(domain: Sequence[tuple[float, float]], resolution: int) -> list:
    """Uniform lattice with ``resolution`` points per axis, endpoints included."""
    if resolution < 2:
        raise InvalidSpec("grid resolution must be at least 2")
    axes = [[lo + (hi - lo) * i / (resolution - 1) for i in range(resolution)] for lo, hi in domain]
    if len(axes) == 1:
        return list(axes[0])
    return [tuple(p) for p in itertools.product(*axes)]


def _bits(v: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in v)


@dataclass(frozen=True)
class InstanceSpec:
    """Base for named instance variants; ``kind`` is the file-format discriminator."""

    kind: ClassVar[str] = ""

    def build(self) -> GameDefinition:
        raise NotImplementedError

    def params(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Forecasting(InstanceSpec):
    """m binary events; ``q`` lists outcome probabilities in lexicographic order of {0,1}^m."""

    kind: ClassVar[str] = "forecasting"
    m: int
    q: tuple[float, ...]
    grid: int | None = None

    def build(self) -> GameDefinition:
        if self.m < 1:
            raise InvalidSpec("m must be at least 1")
        outcomes = list(itertools.product((0, 1), repeat=self.m))
        if len(self.q) != len(outcomes):
            raise InvalidSpec(f"q needs {len(outcomes)} entries for m={self.m}")
        q = _check_masses(self.q, "outcome probabilities")
        return _geometric(
            [_bits(o) for o in outcomes],
            q,
            outcomes,
            "euclidean",
            [(0.0, 1.0)] * self.m,
            self.grid,
            name=f"forecasting-m{self.m}",
            meta={"kind": self.kind, "params": _plain(self.params())},
        )


@dataclass(frozen=True)
class FiniteHotelling(InstanceSpec):
    """Retail locations and a weighted sample of consumers in a metric space.

    Consumers equidistant from two closest locations are rejected by default
    (``tie_policy="reject"``); ``"allow"`` keeps them and leaves the failure to
    projection.
    """

    kind: ClassVar[str] = "finite-hotelling"
    locations: tuple
    consumers: tuple
    weights: tuple[float, ...]
    metric: str = "euclidean"
    tie_policy: str = "reject"

    def build(self) -> GameDefinition:
        if self.metric not in METRICS:
            raise InvalidSpec(f"unknown metric {self.metric!r}")
        if self.tie_policy not in ("reject", "allow"):
            raise InvalidSpec("tie_policy must be 'reject' or 'allow'")
        locs = _points(self.locations, "locations")
        cons = _points(self.consumers, "consumers")
        if locs.shape[1] != cons.shape[1]:
            raise InvalidSpec("locations and consumers must share a dimension")
        if len(self.weights) != len(cons):
            raise InvalidSpec("one weight per consumer is required")
        ws = _check_masses(self.weights, "consumer weights")
        table = _metric_table(locs, cons, self.metric)
        if self.tie_policy == "reject":
            for j, w in enumerate(ws):
                col = table[:, j]
                if w > 0 and np.sum(col <= col.min() + HOTELLING_TIE_TOL) > 1:
                    raise InvalidSpec(f"consumer c{j} is equidistant from several closest locations")
        return _wrap(
            lambda: GameDefinition.finite(
                [f"L{i}" for i in range(len(locs))],
                [f"c{j}" for j in range(len(cons))],
                ws,
                table,
                tie_tol=HOTELLING_TIE_TOL,
                name="finite-hotelling",
                meta={"kind": self.kind, "params": _plain(self.params())},
            )
        )


@dataclass(frozen=True)
class ClassicHotelling(InstanceSpec):
    """Retailers anywhere on [0, 1]; consumers at the points of a discrete distribution."""

    kind: ClassVar[str] = "classic-hotelling"
    points: tuple[float, ...]
    weights: tuple[float, ...]
    grid: int | None = None

    def build(self) -> GameDefinition:
        if len(self.points) != len(self.weights) or not self.points:
            raise InvalidSpec("points and weights must be non-empty and aligned")
        if len(set(self.points)) != len(self.points):
            raise InvalidSpec("consumer points must be distinct")
        if any(not 0.0 <= float(p) <= 1.0 for p in self.points):
            raise InvalidSpec("consumer points must lie in [0, 1]")
        ws = _check_masses(self.weights, "consumer weights")
        return _geometric(
            [float(p) for p in self.points],
            ws,
            [[float(p)] for p in self.points],
            "euclidean",
            [(0.0, 1.0)],
            self.grid,
            name="classic-hotelling",
            meta={"kind": self.kind, "params": _plain(self.params())},
        )


@dataclass(frozen=True)
class VoronoiGraph(InstanceSpec):
    """Influencers on the vertices of a weighted graph; users are the vertices."""

    kind: ClassVar[str] = "voronoi-graph"
    vertices: tuple
    edges: tuple
    masses: tuple[float, ...]

    def build(self) -> GameDefinition:
        if len(self.masses) != len(self.vertices):
            raise InvalidSpec("one mass per vertex is required")
        ws = _check_masses(self.masses, "vertex masses")
        for e in self.edges:
            if len(e) > 2 and float(e[2]) < 0:
                raise InvalidSpec("edge weights must be non-negative")
        return _wrap(
            lambda: GameDefinition.graph(
                list(self.vertices),
                [tuple(e) for e in self.edges],
                ws,
                name="voronoi-graph",
                meta={"kind": self.kind, "params": _plain(self.params())},
            )
        )


@dataclass(frozen=True)
class SpatialVoting(InstanceSpec):
    """Candidates choose ideological positions; each voter has weight 1/|voters|.

    The ideology space is the unit box unless ``domain`` is given.  Voters with
    the same ideal point aggregate onto one pseudo-target.
    """

    kind: ClassVar[str] = "spatial-voting"
    ideals: tuple
    metric: str = "euclidean"
    domain: tuple | None = None
    grid: int | None = None

    def build(self) -> GameDefinition:
        if self.metric not in METRICS:
            raise InvalidSpec(f"unknown metric {self.metric!r}")
        pts = _points(self.ideals, "voter ideals")
        dim = pts.shape[1]
        box = [(0.0, 1.0)] * dim if self.domain is None else [tuple(map(float, b)) for b in self.domain]
        k = len(pts)
        return _geometric(
            [f"v{i}" for i in range(k)],
            [1.0 / k] * k,
            pts.tolist(),
            self.metric,
            box,
            self.grid,
            name="spatial-voting",
            meta={"kind": self.kind, "params": _plain(self.params())},
        )


@dataclass(frozen=True)
class ThreeNode(InstanceSpec):
    """Path x1 - x2 - x3 with masses (2-2e)/n, (2-e)/n and (n-4+3e)/n; no pure equilibrium exists.

    Requires e in (0, 1/2] and n > max(6, 4/e - 4).
    """

    kind: ClassVar[str] = "three-node"
    eps: float
    n: int

    def masses(self) -> tuple[float, float, float]:
        e, n = float(self.eps), int(self.n)
        return ((2 - 2 * e) / n, (2 - e) / n, (n - 4 + 3 * e) / n)

    def build(self) -> GameDefinition:
        e, n = float(self.eps), int(self.n)
        if not 0.0 < e <= 0.5:
            raise InvalidSpec("eps must lie in (0, 1/2]")
        if not n > max(6.0, 4.0 / e - 4.0) + 1e-9:
            raise InvalidSpec(f"n must exceed max(6, 4/eps - 4) = {max(6.0, 4.0 / e - 4.0):g}")
        return GameDefinition.graph(
            ["x1", "x2", "x3"],
            [("x1", "x2", 1), ("x2", "x3", 1)],
            list(self.masses()),
            name=f"three-node(eps={e:g},n={n})",
            meta={"kind": self.kind, "params": _plain(self.params())},
        )


FORECASTING_M2_VERTICES = {"x1": (0, 1), "x2": (0, 0), "x3": (1, 0), "x4": (1, 1)}


@dataclass(frozen=True)
class ForecastingM2(InstanceSpec):
    """Two-event forecasting game with masses (2-e1)/n, (2-e1)/n, (2-e2)/n, (n-6+2e1+e2)/n.

    x2 = (0,0) neighbours x1 = (0,1) and x3 = (1,0); x4 = (1,1) carries the bulk.
    """

    kind: ClassVar[str] = "forecasting-m2"
    eps1: float
    eps2: float
    n: int
    grid: int | None = None

    def masses(self) -> tuple[float, ...]:
        e1, e2, n = float(self.eps1), float(self.eps2), int(self.n)
        return ((2 - e1) / n, (2 - e1) / n, (2 - e2) / n, (n - 6 + 2 * e1 + e2) / n)

    def nonexistence_conditions(self) -> dict[str, bool]:
        """Parameter constraints under which no pure equilibrium exists."""
        e1, e2, n = float(self.eps1), float(self.eps2), int(self.n)
        return {
            "eps_gap": (2 / 3) * e1 - e2 / 2 > 1 / 3,
            "n_large": n > 3 + 2 * (3 - 2 * e1 - e2) / e2,
        }

    def build(self) -> GameDefinition:
        e1, e2 = float(self.eps1), float(self.eps2)
        if not 0.5 < e1 < 1.0:
            raise InvalidSpec("eps1 must lie in (1/2, 1)")
        if not 0.0 < e2 < e1:
            raise InvalidSpec("eps2 must lie in (0, eps1)")
        ms = self.masses()
        if ms[3] <= 0:
            raise InvalidSpec("n is too small: the mass on x4 is not positive")
        return _geometric(
            list(FORECASTING_M2_VERTICES),
            list(ms),
            list(FORECASTING_M2_VERTICES.values()),
            "euclidean",
            [(0.0, 1.0)] * 2,
            self.grid,
            name=f"forecasting-m2(eps1={e1:g},eps2={e2:g},n={self.n})",
            meta={"kind": self.kind, "params": _plain(self.params())},
        )


@dataclass(frozen=True)
class NonExtremePair(InstanceSpec):
    """Positions [0, 1], targets 0 and 1 with mass 1/2 each."""

    kind: ClassVar[str] = "non-extreme-pair"
    grid: int | None = None

    def build(self) -> GameDefinition:
        return _geometric(
            [0.0, 1.0],
            [0.5, 0.5],
            [[0.0], [1.0]],
            "euclidean",
            [(0.0, 1.0)],
            self.grid,
            name="non-extreme-pair",
            meta={"kind": self.kind, "params": _plain(self.params())},
        )


SPECS: dict[str, type[InstanceSpec]] = {
    cls.kind: cls
    for cls in (
        Forecasting,
        FiniteHotelling,
        ClassicHotelling,
        VoronoiGraph,
        SpatialVoting,
        ThreeNode,
        ForecastingM2,
        NonExtremePair,
    )
}


def _plain(x: Any):
    """Tuples to lists, recursively, for JSON output."""
    if isinstance(x, (tuple, list)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    return x


def _freeze(x: Any):
    if isinstance(x, list):
        return tuple(_freeze(v) for v in x)
    return x


def spec_from_params(kind: str, params: Mapping[str, Any]) -> InstanceSpec:
    """Instantiate the spec registered under ``kind`` from plain parameters."""
    try:
        cls = SPECS[kind]
    except KeyError:
        raise InvalidSpec(f"unknown instance kind {kind!r}; choose from {sorted(SPECS)}") from None
    names = {f.name for f in fields(cls)}
    extra = set(params) - names
    if extra:
        raise InvalidSpec(f"unknown parameters for {kind}: {sorted(extra)}")
    try:
        return cls(**{k: _freeze(v) for k, v in params.items()})
    except TypeError as exc:
        raise InvalidSpec(str(exc)) from None


def build(spec: InstanceSpec) -> GameDefinition:
    """The game described by ``spec``; raises InvalidSpec on invalid parameters."""
    return _wrap(spec.build)


def deviation_grid(spec_or_game: InstanceSpec | GameDefinition, resolution: int | None = None) -> list:
    """Uniform lattice over the position domain followed by any missing pseudo-targets."""
    game = build(spec_or_game) if isinstance(spec_or_game, InstanceSpec) else spec_or_game
    if game.kind != "geometric":
        raise InvalidSpec("deviation grids apply to games with a continuous position domain")
    dim = game.dimension
    res = default_resolution(dim) if resolution is None else int(resolution)
    pts = lattice(game.domain, res)
    vertices = [as_position(p, dim) for p in game.points]
    return list(dict.fromkeys(pts + vertices))


def _wrap(fn):
    try:
        return fn()
    except InvalidGame as exc:
        raise InvalidSpec(str(exc)) from None


def _points(values, what: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise InvalidSpec(f"{what} must be numeric points") from None
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or len(arr) == 0:
        raise InvalidSpec(f"{what} must be a non-empty list of points")
    return arr


def _geometric(targets, masses, points, metric, domain, grid, *, name, meta) -> GameDefinition:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    dim = pts.shape[1]
    res = default_resolution(dim) if grid is None else int(grid)

    def make():
        base = GameDefinition.geometric(targets, masses, pts, metric=metric, domain=domain, name=name, meta=meta)
        cands = deviation_grid(base, res)
        return GameDefinition.geometric(
            targets, masses, pts, metric=metric, domain=domain, candidates=cands, name=name, meta={**meta, "grid": res}
        )

    return _wrap(make)
