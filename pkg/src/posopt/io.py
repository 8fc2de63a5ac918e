"""JSON game files and report serialization.

Game files carry a ``kind`` discriminator:

``finite``
    ``positions``: list of ids; ``targets``: ``[{"id", "mass"}]``;
    ``distances``: positions x targets table (``"inf"`` allowed);
    optional ``tie_tol`` and ``candidates``.
``geometric``
    ``dimension``, ``metric``, ``domain`` (``[[lo, hi], ...]``);
    ``targets``: ``[{"id", "mass", "point"}]``; optional ``grid`` (lattice
    points per axis for deviation candidates) and ``tie_tol``.
``graph``
    ``vertices``; ``edges``: ``[[u, v, weight], ...]``; ``targets``:
    ``[{"id", "mass"}]`` keyed by vertex (absent vertices get mass 0).
any instance name (``three-node``, ``forecasting``, ...)
    ``params``: the instance parameters.  A ``targets`` list may be present
    for reference and is ignored when loading.

Ids given as JSON arrays become tuples.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import instances
from .errors import InvalidSpec
from .game import GameDefinition


def _freeze(x: Any):
    if isinstance(x, list):
        return tuple(_freeze(v) for v in x)
    return x


def _plain(x: Any):
    """JSON-ready copy: tuples become lists, non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, str) else k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if hasattr(x, "numerator") and not isinstance(x, (int, bool)):
        return float(x)
    return x


def _number(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise InvalidSpec(f"not a number: {v!r}")
    return float(v)


def _targets(data: dict) -> tuple[list, list[float]]:
    try:
        ts = data["targets"]
        return [_freeze(t["id"]) for t in ts], [float(t["mass"]) for t in ts]
    except (KeyError, TypeError) as exc:
        raise InvalidSpec(f"targets must be a list of {{id, mass}} objects ({exc})") from None


def game_from_dict(data: dict) -> GameDefinition:
    if not isinstance(data, dict) or "kind" not in data:
        raise InvalidSpec("a game file must be a JSON object with a 'kind' field")
    kind = data["kind"]
    name = data.get("name", "")
    try:
        if kind == "finite":
            ids, masses = _targets(data)
            table = [[_number(v) for v in row] for row in data["distances"]]
            kw = {}
            if "candidates" in data:
                kw["candidates"] = [_freeze(c) for c in data["candidates"]]
            return GameDefinition.finite(
                [_freeze(p) for p in data["positions"]],
                ids,
                masses,
                table,
                tie_tol=float(data.get("tie_tol", 0.0)),
                name=name,
                **kw,
            )
        if kind == "geometric":
            ids, masses = _targets(data)
            points = [t["point"] for t in data["targets"]]
            dim = int(data.get("dimension", len(points[0]) if isinstance(points[0], list) else 1))
            domain = data.get("domain") or [[0.0, 1.0]] * dim
            base = GameDefinition.geometric(
                ids,
                masses,
                points,
                metric=data.get("metric", "euclidean"),
                domain=domain,
                tie_tol=float(data.get("tie_tol", 1e-12)),
                name=name,
            )
            grid = int(data.get("grid", instances.default_resolution(base.dimension)))
            return GameDefinition.geometric(
                ids,
                masses,
                points,
                metric=base.metric,
                domain=base.domain,
                candidates=instances.deviation_grid(base, grid),
                tie_tol=base.tie_tol,
                name=name,
                meta={"grid": grid},
            )
        if kind == "graph":
            ids, masses = _targets(data)
            weights = dict(zip(ids, masses))
            kw = {"tie_tol": float(data["tie_tol"])} if "tie_tol" in data else {}
            vertices = [_freeze(v) for v in data["vertices"]]
            unknown = set(weights) - set(vertices)
            if unknown:
                raise InvalidSpec(f"targets reference unknown vertices {sorted(map(str, unknown))}")
            return GameDefinition.graph(
                vertices,
                [tuple(_freeze(v) for v in e) for e in data["edges"]],
                weights,
                name=name,
                **kw,
            )
    except KeyError as exc:
        raise InvalidSpec(f"{kind} game is missing the field {exc}") from None
    if kind in instances.SPECS:
        spec = instances.spec_from_params(kind, data.get("params", {}))
        return instances.build(spec)
    raise InvalidSpec(f"unknown game kind {kind!r}")


def load_game(path: str | Path) -> GameDefinition:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidSpec(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"{path} is not valid JSON: {exc}") from None
    return game_from_dict(data)


def game_to_dict(game: GameDefinition) -> dict:
    """Serializable form; built instances keep their name and parameters."""
    kind = game.meta.get("kind")
    targets = [{"id": t, "mass": w} for t, w in zip(game.targets, game.masses)]
    if kind in instances.SPECS:
        return _plain({"kind": kind, "name": game.name, "params": game.meta["params"], "targets": targets})
    if game.kind == "finite":
        return _plain(
            {
                "kind": "finite",
                "name": game.name,
                "positions": list(game.positions),
                "targets": targets,
                "distances": game.table.tolist(),
                "tie_tol": game.tie_tol,
                "candidates": list(game.deviation_candidates),
            }
        )
    if game.kind == "graph":
        return _plain(
            {
                "kind": "graph",
                "name": game.name,
                "vertices": list(game.positions),
                "edges": game.meta.get("edges", []),
                "targets": targets,
                "tie_tol": game.tie_tol,
            }
        )
    for t, p in zip(targets, game.points.tolist()):
        t["point"] = p
    return _plain(
        {
            "kind": "geometric",
            "name": game.name,
            "dimension": game.dimension,
            "metric": game.metric,
            "domain": [list(b) for b in game.domain],
            "targets": targets,
            "grid": game.meta.get("grid", instances.default_resolution(game.dimension)),
            "tie_tol": game.tie_tol,
        }
    )


def dumps(obj: Any) -> str:
    """JSON text; floats use the shortest repr that round-trips."""
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def write_text(text: str, path: str | Path | None) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_json(obj: Any, path: str | Path | None = None) -> None:
    write_text(dumps(obj), path)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    v = _plain(v)
    if isinstance(v, list):
        return json.dumps(v)
    return v


def write_csv(header: Sequence[str], rows: Iterable[Sequence], path: str | Path | None = None) -> None:
    write_text(csv_text(header, rows), path)
