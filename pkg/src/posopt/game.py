"""Game definitions, pure profiles and winner-share utilities.

A game is the tuple of positions, targets, a proximity function and a target
distribution.  Positions come in three flavours:

* ``finite``: an explicit list of positions with a dense distance table,
* ``geometric``: points of a box in R^k (scalars when k == 1) under a named
  metric, with the targets given as points of the box,
* ``graph``: vertices of a weighted graph under the shortest-path metric.

Ties in proximity are split evenly among every *player* attaining the minimum,
so co-located players each count once.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, InvalidGame

FLOAT_TIE_TOL = 1e-12
# a deviation must gain more than this to count as strictly profitable
GAIN_TOL = 1e-12
MASS_TOL = 1e-12
METRICS = ("euclidean", "manhattan", "chebyshev")
KINDS = ("finite", "geometric", "graph")


def _freeze(x):
    if isinstance(x, list):
        return tuple(_freeze(v) for v in x)
    return x


def as_position(x, dim: int):
    """Canonical hashable form of a geometric position."""
    if dim == 1:
        if isinstance(x, (tuple, list, np.ndarray)):
            (x,) = tuple(np.ravel(x))
        return float(x)
    arr = np.asarray(x, dtype=float).ravel()
    if arr.shape != (dim,):
        raise DomainError(f"expected a point of dimension {dim}, got {x!r}")
    return tuple(float(v) for v in arr)


def _metric_table(xs: np.ndarray, ys: np.ndarray, metric: str) -> np.ndarray:
    diff = xs[:, None, :] - ys[None, :, :]
    if metric == "euclidean":
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if metric == "manhattan":
        return np.sum(np.abs(diff), axis=-1)
    if metric == "chebyshev":
        return np.max(np.abs(diff), axis=-1)
    raise InvalidGame(f"unknown metric {metric!r}")


@dataclass(frozen=True, eq=False)
class GameDefinition:
    """A position-optimization game.

    Use the ``finite``, ``geometric`` and ``graph`` constructors rather than
    calling this directly.
    """

    targets: tuple
    masses: tuple[float, ...]
    kind: str
    positions: tuple | None
    deviation_candidates: tuple
    tie_tol: float = 0.0
    table: np.ndarray | None = None
    points: np.ndarray | None = None
    metric: str | None = None
    domain: tuple[tuple[float, float], ...] | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidGame(f"unknown position kind {self.kind!r}")
        if len(self.targets) == 0:
            raise InvalidGame("a game needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise InvalidGame("target ids must be distinct")
        if len(self.masses) != len(self.targets):
            raise InvalidGame("one mass per target is required")
        m = np.asarray(self.masses, dtype=float)
        if np.any(~np.isfinite(m)) or np.any(m < 0):
            raise InvalidGame("target masses must be finite and non-negative")
        if abs(math.fsum(self.masses) - 1.0) > MASS_TOL:
            raise InvalidGame(f"target masses sum to {math.fsum(self.masses)!r}, not 1")
        if self.table is not None:
            if np.any(np.isnan(self.table)) or np.any(self.table < 0):
                raise InvalidGame("proximity values must be non-negative")
            self.table.setflags(write=False)
        if self.points is not None:
            self.points.setflags(write=False)

    # -- constructors -----------------------------------------------------

    @classmethod
    def finite(
        cls,
        positions: Sequence[Hashable],
        targets: Sequence[Hashable],
        masses: Sequence[float],
        distances: Sequence[Sequence[float]] | Callable[[Any, Any], float],
        *,
        tie_tol: float = 0.0,
        candidates: Sequence[Hashable] | None = None,
        name: str = "",
        meta: Mapping | None = None,
    ) -> GameDefinition:
        """Finite game; ``distances`` is a positions x targets table or a callable."""
        positions = tuple(_freeze(p) for p in positions)
        targets = tuple(_freeze(t) for t in targets)
        if len(set(positions)) != len(positions):
            raise InvalidGame("positions must be distinct")
        if callable(distances):
            table = np.array([[float(distances(x, y)) for y in targets] for x in positions], dtype=float)
        else:
            table = np.array(distances, dtype=float)
        if table.shape != (len(positions), len(targets)):
            raise InvalidGame(f"distance table has shape {table.shape}, expected {(len(positions), len(targets))}")
        cands = positions if candidates is None else tuple(_freeze(c) for c in candidates)
        return cls(
            targets=targets,
            masses=tuple(float(w) for w in masses),
            kind="finite",
            positions=positions,
            deviation_candidates=cands,
            tie_tol=float(tie_tol),
            table=np.ascontiguousarray(table),
            name=name,
            meta=dict(meta or {}),
        )

    @classmethod
    def geometric(
        cls,
        targets: Sequence[Hashable],
        masses: Sequence[float],
        points: Sequence,
        *,
        metric: str = "euclidean",
        domain: Sequence[Sequence[float]] | None = None,
        candidates: Sequence | None = None,
        tie_tol: float = FLOAT_TIE_TOL,
        name: str = "",
        meta: Mapping | None = None,
    ) -> GameDefinition:
        """Positions are every point of a box; each target sits at a point of it."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        dim = pts.shape[1]
        if metric not in METRICS:
            raise InvalidGame(f"unknown metric {metric!r}; choose from {METRICS}")
        box = tuple((0.0, 1.0) for _ in range(dim)) if domain is None else tuple(
            (float(lo), float(hi)) for lo, hi in domain
        )
        if len(box) != dim:
            raise InvalidGame("domain dimension does not match the target points")
        for lo_hi, col in zip(box, pts.T):
            if np.any(col < lo_hi[0]) or np.any(col > lo_hi[1]):
                raise InvalidGame("every target point must lie inside the position domain")
        if candidates is None:
            cands = tuple(dict.fromkeys(as_position(p, dim) for p in pts))
        else:
            cands = tuple(dict.fromkeys(as_position(c, dim) for c in candidates))
        return cls(
            targets=tuple(_freeze(t) for t in targets),
            masses=tuple(float(w) for w in masses),
            kind="geometric",
            positions=None,
            deviation_candidates=cands,
            tie_tol=float(tie_tol),
            points=np.ascontiguousarray(pts),
            metric=metric,
            domain=box,
            name=name,
            meta=dict(meta or {}),
        )

    @classmethod
    def graph(
        cls,
        vertices: Sequence[Hashable],
        edges: Iterable[Sequence],
        masses: Sequence[float] | Mapping[Hashable, float],
        *,
        tie_tol: float | None = None,
        name: str = "",
        meta: Mapping | None = None,
    ) -> GameDefinition:
        """Vertices are both positions and targets; proximity is the shortest-path length."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import shortest_path

        vertices = tuple(_freeze(v) for v in vertices)
        if len(set(vertices)) != len(vertices):
            raise InvalidGame("vertices must be distinct")
        index = {v: i for i, v in enumerate(vertices)}
        rows, cols, weights = [], [], []
        for edge in edges:
            u, v = _freeze(edge[0]), _freeze(edge[1])
            w = float(edge[2]) if len(edge) > 2 else 1.0
            if u not in index or v not in index:
                raise InvalidGame(f"edge {edge!r} references an unknown vertex")
            if w < 0 or not math.isfinite(w):
                raise InvalidGame("edge weights must be finite and non-negative")
            rows.append(index[u])
            cols.append(index[v])
            weights.append(w)
        k = len(vertices)
        # duplicate edges: keep the lightest
        best: dict[tuple[int, int], float] = {}
        for r, c, w in zip(rows, cols, weights):
            key = (min(r, c), max(r, c))
            best[key] = min(w, best.get(key, math.inf))
        if best:
            r, c = zip(*best.keys())
            adj = coo_matrix((list(best.values()), (r, c)), shape=(k, k)).tocsr()
        else:
            adj = coo_matrix((k, k)).tocsr()
        # zero-weight edges vanish from a sparse matrix; nudge them and zero after
        zero_edges = [key for key, w in best.items() if w == 0.0]
        if zero_edges:
            adj = adj.tolil()
            for r, c in zero_edges:
                adj[r, c] = 1e-300
            adj = adj.tocsr()
        dist = shortest_path(adj, method="D", directed=False)
        if zero_edges:
            dist[dist < 1e-200] = 0.0
        if isinstance(masses, Mapping):
            masses = [float(masses.get(v, 0.0)) for v in vertices]
        if tie_tol is None:
            tie_tol = 0.0 if all(float(w).is_integer() for w in weights) else FLOAT_TIE_TOL
        return cls(
            targets=vertices,
            masses=tuple(float(w) for w in masses),
            kind="graph",
            positions=vertices,
            deviation_candidates=vertices,
            tie_tol=float(tie_tol),
            table=np.ascontiguousarray(dist),
            name=name,
            meta={"edges": [list(e) for e in zip(
                [vertices[i] for i in rows], [vertices[j] for j in cols], weights)], **dict(meta or {})},
        )

    # -- queries ----------------------------------------------------------

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def mass_array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    @property
    def dimension(self) -> int | None:
        return None if self.points is None else self.points.shape[1]

    @cached_property
    def _target_index(self) -> dict:
        return {t: i for i, t in enumerate(self.targets)}

    @cached_property
    def _position_index(self) -> dict:
        return {} if self.positions is None else {p: i for i, p in enumerate(self.positions)}

    def target_index(self, target) -> int:
        try:
            return self._target_index[_freeze(target)]
        except KeyError:
            raise DomainError(f"unknown target {target!r}") from None

    def normalize(self, x):
        """Canonical form of a position; rejects positions outside the action set."""
        if self.kind == "geometric":
            pos = as_position(x, self.dimension)
            coords = (pos,) if self.dimension == 1 else pos
            for c, (lo, hi) in zip(coords, self.domain):
                if not lo <= c <= hi:
                    raise DomainError(f"position {x!r} lies outside the domain {self.domain}")
            return pos
        pos = _freeze(x)
        if pos not in self._position_index:
            raise DomainError(f"unknown position {x!r}")
        return pos

    def distance_matrix(self, xs: Sequence) -> np.ndarray:
        """Proximity of each position in ``xs`` to every target (rows x targets)."""
        if self.kind == "geometric":
            dim = self.dimension
            arr = np.array([np.ravel(np.asarray(x, dtype=float)) for x in xs], dtype=float).reshape(len(xs), dim)
            return np.ascontiguousarray(_metric_table(arr, self.points, self.metric))
        idx = [self._position_index[self.normalize(x)] for x in xs]
        return np.ascontiguousarray(self.table[idx])

    def proximity(self, x, y) -> float:
        return float(self.distance_matrix([x])[0, self.target_index(y)])

    def restrict(self, positions: Sequence, name: str | None = None) -> GameDefinition:
        """The finite game whose action set is ``positions``."""
        positions = [self.normalize(p) for p in positions]
        return GameDefinition.finite(
            positions,
            self.targets,
            self.masses,
            self.distance_matrix(positions),
            tie_tol=self.tie_tol,
            name=name if name is not None else (f"{self.name}|restricted" if self.name else "restricted"),
            meta={"parent_kind": self.kind},
        )


@dataclass(frozen=True)
class PureProfile:
    """The positions of n players, in player order."""

    positions: tuple

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(_freeze(p) for p in self.positions))

    @classmethod
    def from_counts(cls, positions: Sequence, counts: Sequence[int]) -> PureProfile:
        """Players laid out position by position, in the given order."""
        if len(positions) != len(counts):
            raise DomainError("positions and counts must align")
        if any(int(k) < 0 for k in counts):
            raise DomainError("counts must be non-negative")
        return cls(tuple(p for p, k in zip(positions, counts) for _ in range(int(k))))

    @property
    def n(self) -> int:
        return len(self.positions)

    @cached_property
    def counts(self) -> dict:
        return counts(self)

    def distinct(self) -> tuple:
        return tuple(self.counts)


def counts(profile: PureProfile | Sequence) -> dict:
    """Multiplicity of each distinct position, keyed in order of first appearance."""
    positions = profile.positions if isinstance(profile, PureProfile) else tuple(_freeze(p) for p in profile)
    return dict(Counter(positions))


def _profile_table(game: GameDefinition, profile: PureProfile):
    prof = PureProfile(tuple(game.normalize(x) for x in profile.positions))
    distinct = prof.distinct()
    D = game.distance_matrix(distinct)
    c = np.array([prof.counts[p] for p in distinct], dtype=np.int64)
    where = {p: i for i, p in enumerate(distinct)}
    return prof, distinct, D, c, [where[p] for p in prof.positions]


def win_shares(game: GameDefinition, profile: PureProfile, target) -> list[Fraction]:
    """Share of ``target`` won by each player, as exact fractions summing to 1."""
    if profile.n < 1:
        raise DomainError("a profile needs at least one player")
    t = game.target_index(target)
    prof = PureProfile(tuple(game.normalize(x) for x in profile.positions))
    d = game.distance_matrix(prof.positions)[:, t]
    thr = float(np.min(d)) + game.tie_tol
    winners = [i for i, di in enumerate(d) if di <= thr]
    share = Fraction(1, len(winners))
    won = set(winners)
    return [share if i in won else Fraction(0) for i in range(prof.n)]


def pure_utilities(game: GameDefinition, profile: PureProfile) -> tuple[float, ...]:
    """Expected winner share of every player."""
    if profile.n < 1:
        raise DomainError("a profile needs at least one player")
    _, _, D, c, slot = _profile_table(game, profile)
    u = kernels.position_utilities(D, game.mass_array, c, game.tie_tol)
    return tuple(float(u[s]) for s in slot)
