"""Symmetric mixed strategies: closed forms, exact and sampled utilities, coverage."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BudgetExceeded, DomainError, OutOfRange
from .game import GameDefinition
from .projection import PseudoSpace

DEFAULT_TOL = 1e-12
MAX_BISECT = 200
DEFAULT_BUDGET = 10**6
MC_CHUNK = 1 << 16
EXACT_COVERAGE_MAX = 20
# slack on the 1/n bounds so a bisection-rounded sigma is not flagged
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class MixedStrategy:
    """A probability vector over distinct positions."""

    support: tuple
    weights: tuple[float, ...]

    def __post_init__(self):
        support = tuple(tuple(s) if isinstance(s, list) else s for s in self.support)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(support) != len(self.weights):
            raise DomainError("support and weights must align")
        if len(set(support)) != len(support):
            raise DomainError("support entries must be distinct")
        if any(w < 0 for w in self.weights):
            raise DomainError("weights must be non-negative")
        if abs(math.fsum(float(w) for w in self.weights) - 1.0) > 1e-12:
            raise DomainError("weights must sum to 1")

    @classmethod
    def on(cls, ps: PseudoSpace, weights: Sequence[float]) -> MixedStrategy:
        """A strategy over the pseudo-targets, in their order."""
        return cls(ps.pseudo_targets, tuple(weights))

    def weight(self, x) -> float:
        try:
            return self.weights[self.support.index(x)]
        except ValueError:
            return 0.0

    def positive(self) -> tuple[tuple, tuple[float, ...]]:
        """Support points carrying positive weight."""
        keep = [i for i, w in enumerate(self.weights) if w > 0]
        return tuple(self.support[i] for i in keep), tuple(float(self.weights[i]) for i in keep)


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")


def _spread(sigma: float, n: int) -> float:
    """1 - sigma^n - (1-sigma)^n without cancellation near either endpoint."""
    if sigma <= 0.5:
        return -math.expm1(n * math.log1p(-sigma)) - sigma**n
    return -math.expm1(n * math.log(sigma)) - (1.0 - sigma) ** n


def _head(sigma: float, n: int) -> float:
    """sigma - sigma^n without cancellation near sigma = 1."""
    return -sigma * math.expm1((n - 1) * math.log(sigma))


def g_lower(p: float, sigma: float, n: int) -> float:
    """Utility of a deviation to a pseudo-target of mass p played with weight sigma.

    Counts only the outcomes where the deviator shares its own pseudo-target
    (some opponent elsewhere) or everyone is co-located; equals p at sigma = 0.
    """
    _check_n(n)
    if not 0.0 <= sigma <= 1.0:
        raise DomainError("sigma must lie in [0, 1]")
    if sigma == 0.0:
        return float(p)
    return p / (n * sigma) * _spread(sigma, n) + sigma ** (n - 1) / n


def e1_direct_sum(p: float, sigma: float, n: int) -> float:
    """The same quantity as ``g_lower`` written as a literal binomial sum."""
    _check_n(n)
    if not 0.0 < sigma <= 1.0:
        raise DomainError("sigma must lie in (0, 1]")
    terms = [
        math.comb(n - 1, k) * sigma**k * (1.0 - sigma) ** (n - 1 - k) / (k + 1)
        for k in range(n - 1)
    ]
    return p * math.fsum(terms) + sigma ** (n - 1) / n


def big_g(sigma: float, n: int) -> float:
    """G(sigma) = (sigma - sigma^n) / (1 - sigma^n - (1-sigma)^n), the p that makes sigma indifferent."""
    _check_n(n)
    if not 0.0 <= sigma <= 1.0:
        raise DomainError("sigma must lie in [0, 1]")
    if sigma == 0.0:
        return 1.0 / n
    if n == 2:
        # for two players the ratio is identically 1/2
        return 0.5
    if sigma == 1.0:
        return 1.0 - 1.0 / n
    return _head(sigma, n) / _spread(sigma, n)


def gbar(sigma: float, n: int) -> float:
    """G minus the correction (sigma/n) / (1 - sigma^n - (1-sigma)^n)."""
    _check_n(n)
    if not 0.0 < sigma < 1.0:
        raise DomainError("sigma must lie in (0, 1)")
    return (_head(sigma, n) - sigma / n) / _spread(sigma, n)


def big_g_inverse(p: float, n: int, tol: float = DEFAULT_TOL) -> float:
    """sigma with G(sigma) = p, by bisection on the increasing G."""
    _check_n(n)
    if tol <= 0:
        raise DomainError("tol must be positive")
    lo_p, hi_p = 1.0 / n, 1.0 - 1.0 / n
    if not lo_p - 1e-15 <= p <= hi_p + 1e-15:
        raise OutOfRange(f"p={p} lies outside [1/n, 1-1/n] for n={n}")
    if p <= lo_p:
        return 0.0
    if p >= hi_p:
        return 1.0
    lo, hi = 0.0, 1.0
    mid = 0.5
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        diff = big_g(mid, n) - p
        if abs(diff) <= tol:
            return mid
        if diff < 0:
            lo = mid
        else:
            hi = mid
    return mid


def solve_two_point(p: float, n: int, tol: float = DEFAULT_TOL) -> float:
    """Weight on the mass-p position in the symmetric equilibrium of a two-pseudo-target game.

    Clamped to 0 for p <= 1/n and to 1 for p >= 1 - 1/n.
    """
    _check_n(n)
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    if p <= 1.0 / n:
        return 0.0
    if p >= 1.0 - 1.0 / n:
        return 1.0
    return big_g_inverse(p, n, tol)


def two_point_game(p: float) -> GameDefinition:
    """Two pseudo-targets at distance 1 with masses p and 1 - p."""
    return GameDefinition.finite(
        ["x1", "x2"], ["x1", "x2"], [p, 1.0 - p], [[0.0, 1.0], [1.0, 0.0]], name="two-point"
    )


def _support_tables(game: GameDefinition, x, sigma: MixedStrategy):
    support, weights = sigma.positive()
    if not support:
        raise DomainError("sigma has no positive weight")
    Ds = game.distance_matrix(support)
    dx = game.distance_matrix([game.normalize(x)])[0]
    return support, np.asarray(weights), Ds, dx


def exact_symmetric_utility(
    game: GameDefinition,
    x,
    sigma: MixedStrategy,
    n: int,
    *,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Expected share of a player fixed at ``x`` while n-1 others draw from ``sigma``.

    Sums over the count vectors of the others with multinomial weights.
    """
    if n < 1:
        raise DomainError("n must be positive")
    support, w, Ds, dx = _support_tables(game, x, sigma)
    total = kernels.count_compositions(n - 1, len(support))
    if total > budget:
        raise BudgetExceeded(f"{total} opponent count vectors exceed the budget of {budget}")
    return kernels.symmetric_utility(Ds, dx, game.mass_array, w, n, game.tie_tol)


def exact_share_moments(game: GameDefinition, x, sigma: MixedStrategy, n: int, *, budget: int = DEFAULT_BUDGET) -> tuple[float, float]:
    """Exact mean and second moment of the per-draw share sampled by ``mc_symmetric_utility``.

    A draw is one target and n-1 opponent positions, so the variance of a
    single draw is ``second - mean**2``.
    """
    from ._kernels_py import compositions

    support, w, Ds, dx = _support_tables(game, x, sigma)
    m = n - 1
    if kernels.count_compositions(m, len(support)) > budget:
        raise BudgetExceeded("opponent count vectors exceed the budget")
    mean, second = [], []
    for comp in compositions(m, len(support)):
        coef, left = 1, m
        for k in comp:
            coef *= math.comb(left, k)
            left -= k
        weight = float(coef) * math.prod(q**k for q, k in zip(w, comp) if k)
        occ = [j for j, k in enumerate(comp) if k]
        for t, mt in enumerate(game.masses):
            if mt == 0.0:
                continue
            thr = min([dx[t]] + [Ds[j, t] for j in occ]) + game.tie_tol
            if dx[t] <= thr:
                share = 1.0 / (1 + sum(comp[j] for j in occ if Ds[j, t] <= thr))
                mean.append(weight * mt * share)
                second.append(weight * mt * share * share)
    return math.fsum(mean), math.fsum(second)


def _threads() -> int:
    cap = os.environ.get("POSOPT_THREADS")
    if cap:
        return max(1, int(cap))
    return min(8, os.cpu_count() or 1)


def _chunks(samples: int) -> list[int]:
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    return sizes


def _run_chunks(fn, samples: int, seed: int) -> np.ndarray:
    """Per-chunk (count, mean, M2, min, max), one independent stream per chunk."""
    sizes = _chunks(samples)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, streams))
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return np.array(list(pool.map(lambda job: fn(*job), jobs)))
    return np.array([fn(*job) for job in jobs])


def _summary(vals: np.ndarray):
    mean = float(np.mean(vals))
    return len(vals), mean, float(np.sum((vals - mean) ** 2)), float(vals.min()), float(vals.max())


def _combine(parts: np.ndarray) -> tuple[float, float]:
    """Merge chunk summaries in order; returns (mean, standard error)."""
    if parts[:, 3].min() == parts[:, 4].max():
        return float(parts[0, 3]), 0.0
    n, mean, m2 = 0.0, 0.0, 0.0
    for nb, mb, m2b, _, _ in parts:
        tot = n + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    if n < 2:
        return float(mean), math.inf
    return float(mean), float(math.sqrt(m2 / (n - 1) / n))


def mc_symmetric_utility(
    game: GameDefinition,
    x,
    sigma: MixedStrategy,
    n: int,
    samples: int = 100_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of ``exact_symmetric_utility``.

    Results depend only on ``seed`` and ``samples``, not on the worker count.
    """
    if samples < 1:
        raise DomainError("samples must be positive")
    if n < 1:
        raise DomainError("n must be positive")
    _, w, Ds, dx = _support_tables(game, x, sigma)
    mass = game.mass_array
    w = w / w.sum()
    tol = game.tie_tol

    def chunk(size, ss):
        rng = np.random.default_rng(ss)
        ys = rng.choice(len(mass), size=size, p=mass)
        opp = rng.choice(len(w), size=(size, n - 1), p=w)
        own = dx[ys]
        other = Ds[opp, ys[:, None]]
        best = np.minimum(own, other.min(axis=1, initial=np.inf))
        thr = best + tol
        wins = own <= thr
        ties = 1 + np.sum(other <= thr[:, None], axis=1)
        return _summary(np.where(wins, 1.0 / ties, 0.0))

    return _combine(_run_chunks(chunk, samples, seed))


def _weights_of(sigma) -> list:
    ws = list(sigma.weights) if isinstance(sigma, MixedStrategy) else list(sigma)
    if not ws:
        raise DomainError("empty distribution")
    return ws


def coverage_probability(
    sigma,
    draws: int,
    mode: str = "auto",
    *,
    samples: int = 100_000,
    seed: int = 0,
) -> tuple[float | Fraction, float | None]:
    """Probability that ``draws`` samples from ``sigma`` hit every position.

    ``sigma`` is a MixedStrategy or a weight vector over the positions to be
    covered.  Exact mode uses inclusion-exclusion and returns a Fraction when
    the weights are Fractions; the second element is the standard error (None
    when exact).  ``auto`` is exact up to 20 positions.
    """
    ws = _weights_of(sigma)
    k = len(ws)
    if draws < 0:
        raise DomainError("draws must be non-negative")
    if mode == "auto":
        mode = "exact" if k <= EXACT_COVERAGE_MAX else "mc"
    if mode == "exact":
        if k > EXACT_COVERAGE_MAX:
            raise BudgetExceeded(f"exact coverage over {k} positions exceeds the limit of {EXACT_COVERAGE_MAX}")
        exact = all(isinstance(v, (Fraction, int)) for v in ws)
        if exact:
            ws = [Fraction(v) for v in ws]
            total = Fraction(0)
            for r in range(k + 1):
                for sub in combinations(ws, r):
                    total += (-1) ** r * (1 - sum(sub, Fraction(0))) ** draws
            return total, None
        terms = []
        for r in range(k + 1):
            for sub in combinations(ws, r):
                terms.append((-1) ** r * max(0.0, 1.0 - math.fsum(sub)) ** draws)
        return math.fsum(terms), None
    if mode != "mc":
        raise DomainError("mode must be auto, exact or mc")
    p = np.asarray([float(v) for v in ws])
    p = p / p.sum()

    def chunk(size, ss):
        rng = np.random.default_rng(ss)
        hits = rng.choice(k, size=(size, draws), p=p)
        seen = np.zeros((size, k), dtype=bool)
        np.put_along_axis(seen, hits, True, axis=1)
        return _summary(seen.all(axis=1).astype(float))

    return _combine(_run_chunks(chunk, samples, seed))


def union_bound_coverage(sigma, draws: int):
    """1 - sum_x (1 - sigma_x)^draws, a lower bound on the coverage probability."""
    ws = _weights_of(sigma)
    if all(isinstance(v, (Fraction, int)) for v in ws):
        return 1 - sum((1 - Fraction(v)) ** draws for v in ws)
    return 1.0 - math.fsum((1.0 - v) ** draws for v in ws)


def mixed_threshold(p0: float) -> float:
    """max{43, 32/p0 * log(1/p0)}: above it every symmetric equilibrium tracks P within 1/n."""
    return max(43.0, 8.0 * (4.0 / p0) * math.log(1.0 / p0))


@dataclass
class PositionBound:
    position: object
    p: float
    sigma: float
    gap: float
    lower_ok: bool
    upper_ok: bool


@dataclass
class MixedReport:
    """Per-position comparison of sigma with P against the 1/n band."""

    n: int
    bound: float
    positions: list[PositionBound]
    extreme: bool
    threshold: float
    clears_threshold: bool
    coverage: float
    coverage_halfwidth: float

    @property
    def bounds_hold(self) -> bool:
        return all(b.lower_ok and b.upper_ok for b in self.positions)

    def to_dict(self) -> dict:
        out = asdict(self)
        for b in out["positions"]:
            if isinstance(b["position"], tuple):
                b["position"] = list(b["position"])
        out["bounds_hold"] = self.bounds_hold
        return out


def check_mixed_bounds(
    ps: PseudoSpace,
    sigma: MixedStrategy,
    n: int,
    *,
    samples: int = 100_000,
    seed: int = 0,
) -> MixedReport:
    """Compare sigma_x with p_x for every pseudo-target.

    The coverage probability of n draws is exact for up to 20 pseudo-targets and
    otherwise a Monte Carlo estimate with a 95% half-width.
    """
    _check_n(n)
    xs = set(ps.pseudo_targets)
    support, _ = sigma.positive()
    bound = 1.0 / n
    rows = []
    for x, px in zip(ps.pseudo_targets, ps.p):
        sx = float(sigma.weight(x))
        rows.append(
            PositionBound(
                position=x,
                p=px,
                sigma=sx,
                gap=abs(sx - px),
                lower_ok=sx >= px - bound - BOUND_SLACK,
                upper_ok=sx <= px + bound + BOUND_SLACK,
            )
        )
    weights = [float(sigma.weight(x)) for x in ps.pseudo_targets]
    cov, se = coverage_probability(weights, n, samples=samples, seed=seed)
    thr = mixed_threshold(ps.p0)
    return MixedReport(
        n=n,
        bound=bound,
        positions=rows,
        extreme=all(s in xs for s in support),
        threshold=thr,
        clears_threshold=n > thr,
        coverage=float(cov),
        coverage_halfwidth=0.0 if se is None else 1.96 * se,
    )


@dataclass
class SymmetricReport:
    """Deviation utilities against n-1 opponents playing sigma."""

    n: int
    is_equilibrium: bool
    value: float
    utilities: dict
    best_deviation: object
    gain: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "is_equilibrium": self.is_equilibrium,
            "value": self.value,
            "utilities": [[list(k) if isinstance(k, tuple) else k, v] for k, v in self.utilities.items()],
            "best_deviation": list(self.best_deviation) if isinstance(self.best_deviation, tuple) else self.best_deviation,
            "gain": self.gain,
        }


def verify_symmetric(
    game: GameDefinition,
    sigma: MixedStrategy,
    n: int,
    candidates: Sequence | None = None,
    *,
    tol: float = 1e-9,
    budget: int = DEFAULT_BUDGET,
) -> SymmetricReport:
    """Check that no candidate position beats the symmetric value 1/n by more than ``tol``.

    Candidates default to the game's deviation candidates plus the support.
    """
    _check_n(n)
    support, _ = sigma.positive()
    cands = list(game.deviation_candidates if candidates is None else candidates) + list(support)
    cands = list(dict.fromkeys(game.normalize(c) for c in cands))
    utils = {c: exact_symmetric_utility(game, c, sigma, n, budget=budget) for c in cands}
    value = math.fsum(w * utils[game.normalize(s)] for s, w in zip(*sigma.positive()))
    best = max(cands, key=lambda c: utils[c])
    gain = utils[best] - value
    return SymmetricReport(n, gain <= tol, value, utils, best, gain)


def fig6_curve(n_values: Sequence[int], grid_size: int, tol: float = DEFAULT_TOL) -> list[tuple[int, float, float]]:
    """Rows (n, p, sigma) of the two-point equilibrium weight over a uniform grid of p."""
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    rows = []
    for n in sorted(int(v) for v in n_values):
        for i in range(grid_size):
            p = i / (grid_size - 1)
            rows.append((n, p, solve_two_point(p, n, tol)))
    return rows
