"""Pure equilibria: greedy construction, verification, enumeration and dynamics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BudgetExceeded, ConditionViolated, DomainError, NTooSmall, SupportMismatch
from .game import GAIN_TOL, GameDefinition, PureProfile, pure_utilities
from .projection import PseudoSpace, project

DEFAULT_BUDGET = 10**6
# absorbs rounding in 2/p0 and 2P(x)/p0 when the ratio is an exact integer
_FLOOR_GUARD = 1e-9


def min_players(ps: PseudoSpace) -> int:
    """Smallest n for which the greedy generator is guaranteed to succeed."""
    return math.ceil(2.0 / ps.p0 - _FLOOR_GUARD)


def generate_pure(ps: PseudoSpace, n: int) -> tuple[int, ...]:
    """Count vector of an extreme pure equilibrium with at least two players per pseudo-target.

    Seeds each pseudo-target with floor(2P(x)/p0) players, then adds players one
    at a time where P(x)/(k(x)+1) is largest, breaking ties by lowest index.
    """
    need = min_players(ps)
    if n < need:
        raise NTooSmall(f"n={n} is below ceil(2/p0)={need}")
    k = [math.floor(2.0 * px / ps.p0 + _FLOOR_GUARD) for px in ps.p]
    if sum(k) > n:
        raise NTooSmall(f"the seed already places {sum(k)} > n={n} players")
    for _ in range(n - sum(k)):
        best, best_val = 0, -1.0
        for i, px in enumerate(ps.p):
            v = px / (k[i] + 1)
            if v > best_val:
                best, best_val = i, v
        k[best] += 1
    return tuple(k)


def profile_from_counts(ps: PseudoSpace, counts: Sequence[int]) -> PureProfile:
    if len(counts) != ps.size:
        raise DomainError(f"expected {ps.size} counts, got {len(counts)}")
    return PureProfile.from_counts(ps.pseudo_targets, counts)


@dataclass
class Witness:
    player: int
    position: object
    deviation: object
    utility: float
    deviation_utility: float

    @property
    def gain(self) -> float:
        return self.deviation_utility - self.utility


@dataclass
class EquilibriumReport:
    """Outcome of checking a profile against a set of candidate deviations.

    ``extreme`` and ``covers`` are None when the game has no pseudo-target
    space.  ``grid_verified`` marks games with an uncountable action set, where
    only the supplied candidates were probed.
    """

    is_equilibrium: bool
    witness: Witness | None
    extreme: bool | None
    covers: bool | None
    counts: dict
    utility_min: float
    utility_max: float
    n_candidates: int
    grid_verified: bool

    def to_dict(self) -> dict:
        out = asdict(self)
        out["counts"] = [[_jsonable(p), k] for p, k in self.counts.items()]
        if self.witness is not None:
            w = self.witness
            out["witness"] = {
                "player": w.player,
                "position": _jsonable(w.position),
                "deviation": _jsonable(w.deviation),
                "utility": w.utility,
                "deviation_utility": w.deviation_utility,
                "gain": w.gain,
            }
        return out


def _jsonable(x):
    return list(x) if isinstance(x, tuple) else x


def _try_project(game: GameDefinition) -> PseudoSpace | None:
    try:
        return project(game)
    except ConditionViolated:
        return None


def _rows(game: GameDefinition, profile: PureProfile, candidates: Sequence | None, ps: PseudoSpace | None):
    """Distinct occupied positions followed by the remaining candidates."""
    prof = PureProfile(tuple(game.normalize(x) for x in profile.positions))
    cands = list(game.deviation_candidates if candidates is None else candidates)
    if ps is not None:
        cands += list(ps.pseudo_targets)
    cands = [game.normalize(c) for c in cands]
    rows = list(dict.fromkeys(list(prof.counts) + cands))
    where = {p: i for i, p in enumerate(rows)}
    c = np.zeros(len(rows), dtype=np.int64)
    for p, k in prof.counts.items():
        c[where[p]] = k
    cand_idx = [where[p] for p in dict.fromkeys(cands)]
    return prof, rows, where, c, cand_idx


def verify_pure(
    game: GameDefinition,
    profile: PureProfile,
    candidates: Sequence | None = None,
    *,
    ps: PseudoSpace | None = None,
) -> EquilibriumReport:
    """Check every player against every candidate deviation.

    ``candidates`` defaults to the game's deviation candidates; the
    pseudo-targets are always added when the game projects.  The first strict
    improvement (lowest player, then candidate order) is reported as the witness.
    """
    if profile.n < 1:
        raise DomainError("a profile needs at least one player")
    if ps is None:
        ps = _try_project(game)
    prof, rows, where, c, cand_idx = _rows(game, profile, candidates, ps)
    if not cand_idx:
        raise DomainError("no deviation candidates")
    D = game.distance_matrix(rows)
    mass = game.mass_array
    order = [where[p] for p in prof.counts]
    hit = kernels.find_witness(D, mass, c, order, cand_idx, game.tie_tol, GAIN_TOL)
    utils = kernels.position_utilities(D, mass, c, game.tie_tol)
    occupied = [utils[where[p]] for p in prof.counts]
    witness = None
    if hit is not None:
        a, b, ua, ub = hit
        player = prof.positions.index(rows[a])
        witness = Witness(player, rows[a], rows[b], float(ua), float(ub))
    extreme = covers = None
    if ps is not None:
        xs = set(ps.pseudo_targets)
        extreme = all(p in xs for p in prof.counts)
        covers = all(x in prof.counts for x in ps.pseudo_targets)
    return EquilibriumReport(
        is_equilibrium=hit is None,
        witness=witness,
        extreme=extreme,
        covers=covers,
        counts=dict(prof.counts),
        utility_min=float(min(occupied)),
        utility_max=float(max(occupied)),
        n_candidates=len(cand_idx),
        grid_verified=game.kind == "geometric",
    )


def enumerate_pure_equilibria(
    ps: PseudoSpace,
    game: GameDefinition,
    n: int,
    *,
    budget: int = DEFAULT_BUDGET,
) -> list[tuple[int, ...]]:
    """Every count vector over the pseudo-targets that is an equilibrium against deviations within them.

    Vectors come out in lexicographic order.
    """
    if n < 1:
        raise DomainError("n must be positive")
    total = kernels.count_compositions(n, ps.size)
    if total > budget:
        raise BudgetExceeded(f"{total} count vectors exceed the budget of {budget}")
    D = game.distance_matrix(ps.pseudo_targets)
    found = kernels.enumerate_equilibria(D, game.mass_array, n, game.tie_tol, GAIN_TOL)
    return [tuple(int(v) for v in row) for row in found]


@dataclass
class Step:
    """One move of the dynamics: ``player`` went from ``source`` to ``target``.

    ``improving`` lists every strictly improving destination of the mover with
    its utility, in candidate order.
    """

    index: int
    profile: tuple
    player: int
    source: object
    target: object
    utility: float
    new_utility: float
    improving: list = field(default_factory=list)


@dataclass
class DynamicsResult:
    """``status`` is ``fixed_point``, ``cycle`` or ``max_steps``.

    ``cycle_start`` is the step at which the revisited labeled profile first
    occurred; ``count_revisit`` is the first step whose count vector had been
    seen before, which can happen earlier.
    """

    steps: list[Step]
    final: PureProfile
    status: str
    cycle_start: int | None = None
    count_revisit: int | None = None

    @property
    def converged(self) -> bool:
        return self.status == "fixed_point"


RULES = ("best", "first")


def best_response_dynamics(
    game: GameDefinition,
    profile: PureProfile,
    max_steps: int = 1000,
    candidates: Sequence | None = None,
    *,
    rule: str = "best",
) -> DynamicsResult:
    """Repeatedly move the lowest-indexed player who can strictly improve.

    With ``rule="best"`` the mover goes to its best candidate (ties to the
    earliest candidate); with ``rule="first"`` to the first improving candidate.
    """
    if max_steps < 1:
        raise DomainError("max_steps must be at least 1")
    if rule not in RULES:
        raise DomainError(f"rule must be one of {RULES}")
    positions = [game.normalize(x) for x in profile.positions]
    cands = list(dict.fromkeys(game.normalize(c) for c in (game.deviation_candidates if candidates is None else candidates)))
    rows = list(dict.fromkeys(positions + cands))
    where = {p: i for i, p in enumerate(rows)}
    cand_idx = [where[c] for c in cands]
    D = game.distance_matrix(rows)
    mass = game.mass_array
    c = np.zeros(len(rows), dtype=np.int64)
    for p in positions:
        c[where[p]] += 1

    seen = {tuple(positions): 0}
    seen_counts = {tuple(c): 0}
    steps: list[Step] = []
    status, cycle_start, count_revisit = "max_steps", None, None
    for it in range(max_steps):
        move = None
        checked = set()
        for player, p in enumerate(positions):
            a = where[p]
            if a in checked:
                continue
            checked.add(a)
            ua = float(kernels.position_utilities(D, mass, c, game.tie_tol)[a])
            us = kernels.deviation_utilities(D, mass, c, a, cand_idx, game.tie_tol)
            improving = [(cands[j], float(u)) for j, u in enumerate(us) if cand_idx[j] != a and u - ua > GAIN_TOL]
            if not improving:
                continue
            if rule == "first":
                dest, ub = improving[0]
            else:
                top = max(u for _, u in improving)
                dest, ub = next((d, u) for d, u in improving if u >= top - GAIN_TOL)
            move = (player, p, dest, ua, ub, improving)
            break
        if move is None:
            status = "fixed_point"
            break
        player, src, dest, ua, ub, improving = move
        positions[player] = dest
        c[where[src]] -= 1
        c[where[dest]] += 1
        steps.append(Step(it, tuple(positions), player, src, dest, ua, ub, improving))
        key = tuple(positions)
        ckey = tuple(c)
        if count_revisit is None and ckey in seen_counts:
            count_revisit = it + 1
        seen_counts.setdefault(ckey, it + 1)
        if key in seen:
            status, cycle_start = "cycle", seen[key]
            break
        seen[key] = it + 1
    return DynamicsResult(steps, PureProfile(tuple(positions)), status, cycle_start, count_revisit)


def empirical_distribution(counts: Sequence[int]) -> tuple[float, ...]:
    n = sum(int(k) for k in counts)
    if n < 1 or any(int(k) < 0 for k in counts):
        raise DomainError("counts must be non-negative with a positive total")
    return tuple(int(k) / n for k in counts)


def kl_divergence(phat: Sequence[float], p: Sequence[float]) -> float:
    """D_KL(phat || p) with the convention 0 log 0 = 0."""
    if len(phat) != len(p):
        raise DomainError("distributions must have the same length")
    terms = []
    for a, b in zip(phat, p):
        if a == 0:
            continue
        if b <= 0:
            raise SupportMismatch("phat puts mass where p has none")
        terms.append(a * math.log(a / b))
    return math.fsum(terms)


def floor_cn(c: float | Fraction, n: int) -> int:
    """floor(c*n), exact for Fractions and tolerant of rounding for floats."""
    if isinstance(c, (Fraction, int)):
        return math.floor(Fraction(c) * n)
    # 49 * (1/49) evaluates just below 1 in floating point
    return math.floor(c * n + _FLOOR_GUARD)


def kl_bound(c: float | Fraction, n: int) -> float:
    """log((floor(cn)+1)/floor(cn))."""
    m = floor_cn(c, n)
    if m < 1:
        raise DomainError(f"floor(c*n) = {m}; need c*n >= 1")
    return math.log((m + 1) / m)


@dataclass
class PureTheoremReport:
    counts: tuple[int, ...]
    n: int
    c: float
    floor_cn: int
    utilities: tuple[float, ...]
    utility_bracket: tuple[float, float]
    kl: float
    kl_bound: float
    preconditions: bool
    verdicts: dict[str, bool]

    @property
    def passed(self) -> bool:
        """All verdicts hold; ``preconditions`` is reported separately."""
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        out = asdict(self)
        out["c"] = float(self.c)
        out["passed"] = self.passed
        return out


def check_pure_theorems(
    ps: PseudoSpace,
    counts: Sequence[int],
    n: int,
    c: float | Fraction,
    game: GameDefinition | None = None,
) -> PureTheoremReport:
    """Check the structural and rate guarantees an equilibrium must satisfy.

    Utilities come from ``game`` when given; otherwise from P(x)/k(x), which is
    exact for covering profiles.  Every check yields a verdict, never an error.
    ``preconditions`` records whether n >= 1/c > 2/p0, under which the
    verdicts are guaranteed for equilibria.
    """
    counts = tuple(int(k) for k in counts)
    if len(counts) != ps.size or sum(counts) != n:
        raise DomainError("counts must align with the pseudo-targets and sum to n")
    m = floor_cn(c, n)
    cf = Fraction(c) if isinstance(c, (Fraction, int)) else c
    covers = all(k >= 1 for k in counts)
    if game is not None:
        prof = profile_from_counts(ps, counts)
        utils = pure_utilities(game, prof)
    elif covers:
        utils = tuple(ps.p[i] / k for i, k in enumerate(counts) for _ in range(k))
    else:
        utils = ()
    if m >= 1:
        lo, hi = (1 / n) * m / (m + 1), (1 / n) * (m + 1) / m
        bound = math.log((m + 1) / m)
    else:
        lo, hi, bound = 0.0, math.inf, math.inf
    phat = empirical_distribution(counts)
    kl = kl_divergence(phat, ps.p)
    pre = bool(n * cf >= 1 and 2 * cf < ps.p0)
    verdicts = {
        "covers": covers,
        "at_least_two_per_position": all(k >= 2 for k in counts),
        "min_count_floor_cn": all(k >= m for k in counts),
        "utility_bracket": bool(utils) and all(lo <= u <= hi for u in utils),
        "kl_rate": kl <= bound,
    }
    return PureTheoremReport(counts, n, cf, m, tuple(utils), (lo, hi), kl, bound, pre, verdicts)
