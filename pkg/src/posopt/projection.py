"""Projection of targets onto their unique closest positions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, ConditionViolated
from .game import GameDefinition

DEFAULT_CAP = 4096


@dataclass(frozen=True)
class PseudoSpace:
    """Pseudo-targets ``X*`` with the projected distribution ``p``.

    ``target_map`` sends every positive-mass target id to its index in
    ``pseudo_targets``.  ``p0`` is the smallest projected mass and ``p0_index``
    where it occurs (first occurrence on ties).
    """

    pseudo_targets: tuple
    p: tuple[float, ...]
    p0: float
    p0_index: int
    target_map: dict

    @property
    def size(self) -> int:
        return len(self.pseudo_targets)

    def index(self, x) -> int:
        return self.pseudo_targets.index(x)

    def to_dict(self) -> dict:
        return {
            "x_star": [list(x) if isinstance(x, tuple) else x for x in self.pseudo_targets],
            "p": list(self.p),
            "p0": self.p0,
            "p0_index": self.p0_index,
        }


def _minimizer(game: GameDefinition, t: int):
    """Closest position to target ``t`` and every position tied with it."""
    if game.kind == "geometric":
        # the target's own point is at distance 0 and every other point is farther
        pos = game.normalize(game.points[t])
        return pos, [pos]
    col = game.table[:, t]
    m = float(np.min(col))
    if not math.isfinite(m):
        raise ConditionViolated(game.targets[t], [])
    tied = np.flatnonzero(col <= m + game.tie_tol)
    return game.positions[int(tied[0])], [game.positions[int(i)] for i in tied]


def project(game: GameDefinition, cap: int = DEFAULT_CAP) -> PseudoSpace:
    """Group target masses by pseudo-target.

    Zero-mass targets are ignored.  Raises ``ConditionViolated`` when a
    positive-mass target has several closest positions and ``CapExceeded`` when
    more than ``cap`` pseudo-targets arise.
    """
    order: dict = {}
    mass: list[list[float]] = []
    target_map: dict = {}
    for t, (tid, w) in enumerate(zip(game.targets, game.masses)):
        if w <= 0.0:
            continue
        x, tied = _minimizer(game, t)
        if len(tied) > 1:
            raise ConditionViolated(tid, tied)
        if x not in order:
            if len(order) >= cap:
                raise CapExceeded(f"more than {cap} pseudo-targets")
            order[x] = len(order)
            mass.append([])
        mass[order[x]].append(w)
        target_map[tid] = order[x]
    p = tuple(math.fsum(ws) for ws in mass)
    p0_index = int(np.argmin(p))
    return PseudoSpace(
        pseudo_targets=tuple(order),
        p=p,
        p0=p[p0_index],
        p0_index=p0_index,
        target_map=target_map,
    )


def restrict(game: GameDefinition, ps: PseudoSpace | None = None) -> GameDefinition:
    """The finite game whose positions are exactly the pseudo-targets."""
    ps = project(game) if ps is None else ps
    return game.restrict(ps.pseudo_targets)
