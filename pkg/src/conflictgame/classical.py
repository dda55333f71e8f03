"""Classical strategies, payoff region, Nash and correlated equilibria.

A pure classical strategy for one player is a map from their binary type
to a binary action; there are four, encoded 0..3 as the bit pair
(action on type 0, action on type 1).  Shared classical advice is a
distribution over the 16 pure strategy pairs.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .game import Behavior, GameSpec, PayoffPoint, ValidationError

log = logging.getLogger(__name__)

ALWAYS_ZERO = 0
OUTPUT_TYPE = 1
OUTPUT_COMPLEMENT = 2
ALWAYS_ONE = 3

STRATEGY_LABELS = ("always 0", "output type", "output complement", "always 1")

WEIGHT_TOL = 1e-12


def strategy_action(strategy: int, own_type: int) -> int:
    """Action the encoded pure strategy takes on the given type bit."""
    if not 0 <= strategy <= 3:
        raise ValueError(f"strategy code must be in 0..3, got {strategy!r}")
    return (strategy >> (1 - own_type)) & 1


@dataclass(frozen=True)
class CorrelatedStrategy:
    """Distribution over the 16 pure strategy pairs, weights[s_A][s_B]."""

    weights: np.ndarray

    def __post_init__(self):
        try:
            w = np.array(self.weights, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError("correlated strategy weights are ragged or non-numeric") from exc
        if w.shape != (4, 4):
            raise ValidationError(f"correlated strategy weights must be 4x4, got {w.shape}")
        if np.any(w < -WEIGHT_TOL):
            raise ValidationError("correlated strategy weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"correlated strategy weights sum to {float(w.sum())!r}, expected 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def point_mass(strategy_a: int, strategy_b: int) -> CorrelatedStrategy:
    w = np.zeros((4, 4))
    w[strategy_a, strategy_b] = 1.0
    return CorrelatedStrategy(w)


def behavior_of_deterministic(strategy_a: int, strategy_b: int) -> Behavior:
    """Point-mass behavior of a pure strategy pair."""
    p = np.zeros((2, 2, 2, 2))
    for xa in range(2):
        for xb in range(2):
            p[xa, xb, strategy_action(strategy_a, xa), strategy_action(strategy_b, xb)] = 1.0
    return Behavior(p)


def behavior_of_correlated(cs: CorrelatedStrategy) -> Behavior:
    """Mixture of the 16 deterministic behaviors under the advice weights."""
    p = np.einsum("ab,abwxyz->wxyz", cs.weights, _deterministic_behavior_tensor())
    return Behavior(p)


_DET_BEHAVIORS: np.ndarray | None = None


def _deterministic_behavior_tensor() -> np.ndarray:
    global _DET_BEHAVIORS
    if _DET_BEHAVIORS is None:
        t = np.zeros((4, 4, 2, 2, 2, 2))
        for sa in range(4):
            for sb in range(4):
                t[sa, sb] = behavior_of_deterministic(sa, sb).p
        _DET_BEHAVIORS = t
    return _DET_BEHAVIORS


def _exact_payoff_table(game: GameSpec) -> list[list[tuple[Fraction, Fraction]]]:
    # Fraction(float) is exact, so dyadic tables evaluate without rounding.
    # Convert each prior-weighted utility entry once, then assemble the 16
    # profiles from the precomputed products.
    prior = game.prior.tolist()
    util_a = game.utility_a.tolist()
    util_b = game.utility_b.tolist()
    wa = [[[[Fraction(prior[xa][xb]) * Fraction(util_a[xa][xb][ya][yb])
             for yb in range(2)] for ya in range(2)]
           for xb in range(2)] for xa in range(2)]
    wb = [[[[Fraction(prior[xa][xb]) * Fraction(util_b[xa][xb][ya][yb])
             for yb in range(2)] for ya in range(2)]
           for xb in range(2)] for xa in range(2)]
    table = []
    for sa in range(4):
        row = []
        for sb in range(4):
            fa = Fraction(0)
            fb = Fraction(0)
            for xa in range(2):
                ya = strategy_action(sa, xa)
                for xb in range(2):
                    yb = strategy_action(sb, xb)
                    fa += wa[xa][xb][ya][yb]
                    fb += wb[xa][xb][ya][yb]
            row.append((fa, fb))
        table.append(row)
    return table


def _exact_payoffs(game: GameSpec, strategy_a: int, strategy_b: int) -> tuple[Fraction, Fraction]:
    return _exact_payoff_table(game)[strategy_a][strategy_b]


def deterministic_payoff_points(game: GameSpec) -> list[PayoffPoint]:
    """Payoffs of all 16 pure strategy pairs, in (s_A major, s_B minor) order."""
    table = _exact_payoff_table(game)
    return [PayoffPoint(float(fa), float(fb))
            for row in table for fa, fb in row]


def max_weighted_classical(game: GameSpec, w_a, w_b) -> tuple[Fraction, tuple[int, int]]:
    """Exact maximum of w_a*F_A + w_b*F_B over pure strategy pairs.

    Evaluated in rational arithmetic (floats convert exactly).  Ties go
    to the lowest (s_A, s_B) index pair.
    """
    wa = Fraction(w_a)
    wb = Fraction(w_b)
    table = _exact_payoff_table(game)
    best: Fraction | None = None
    best_pair = (0, 0)
    for sa in range(4):
        for sb in range(4):
            fa, fb = table[sa][sb]
            value = wa * fa + wb * fb
            if best is None or value > best:
                best = value
                best_pair = (sa, sb)
    assert best is not None
    return best, best_pair


# --- payoff region ----------------------------------------------------------

def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone-chain convex hull, counterclockwise, collinear points dropped."""
    unique = sorted(set((float(x), float(y)) for x, y in points))
    if len(unique) <= 2:
        return unique
    lower: list[tuple[float, float]] = []
    for pt in unique:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: list[tuple[float, float]] = []
    for pt in reversed(unique):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:  # all input points collinear
        return [unique[0], unique[-1]]
    return hull


def classical_region(game: GameSpec) -> list[PayoffPoint]:
    """Vertices of the convex hull of the 16 deterministic payoff points."""
    pts = [(p.alice, p.bob) for p in deterministic_payoff_points(game)]
    return [PayoffPoint(x, y) for x, y in convex_hull(pts)]


def region_contains(vertices: list[PayoffPoint], point: tuple[float, float], tol: float = 1e-9) -> bool:
    """Point-in-convex-polygon test against counterclockwise hull vertices."""
    if not vertices:
        return False
    if len(vertices) == 1:
        v = vertices[0]
        return abs(v[0] - point[0]) <= tol and abs(v[1] - point[1]) <= tol
    if len(vertices) == 2:
        a, b = vertices
        if abs(_cross(a, b, point)) > tol:
            return False
        lo_x, hi_x = sorted((a[0], b[0]))
        lo_y, hi_y = sorted((a[1], b[1]))
        return lo_x - tol <= point[0] <= hi_x + tol and lo_y - tol <= point[1] <= hi_y + tol
    n = len(vertices)
    return all(_cross(vertices[i], vertices[(i + 1) % n], point) >= -tol for i in range(n))


# --- Nash equilibria --------------------------------------------------------

def payoff_matrices(game: GameSpec) -> tuple[np.ndarray, np.ndarray]:
    """4x4 bimatrix of the induced one-shot game over pure strategy pairs."""
    table = _exact_payoff_table(game)
    ua = np.empty((4, 4))
    ub = np.empty((4, 4))
    for sa in range(4):
        for sb in range(4):
            fa, fb = table[sa][sb]
            ua[sa, sb] = float(fa)
            ub[sa, sb] = float(fb)
    return ua, ub


@dataclass(frozen=True)
class NashEquilibrium:
    """Mixed equilibrium: per-player distributions over the 4 pure strategies.

    component is True when other equilibria share this payoff point with a
    different induced behavior (degenerate games yield such components; one
    representative is kept).
    """

    mix_a: np.ndarray
    mix_b: np.ndarray
    payoffs: PayoffPoint
    component: bool = False


def _indifference_solution(u: np.ndarray, rows: tuple[int, ...], cols: tuple[int, ...]):
    """Opponent mixture over cols equalizing u across rows, plus the value.

    Solves sum_j u[i, j] q_j = v for i in rows, sum q = 1.  Returns (q, v)
    or None when the system is singular or inconsistent.
    """
    nr, nc = len(rows), len(cols)
    if nc == 1:
        # single column: q is forced, the row values must already agree
        vals = u[list(rows), cols[0]]
        if vals.max() - vals.min() > 1e-9:
            return None
        return np.ones(1), float(vals.mean())
    if nr == 1:
        # one indifference equation with a free value: any simplex point works
        q = np.full(nc, 1.0 / nc)
        return q, float(u[rows[0], list(cols)] @ q)
    lhs = np.zeros((nr + 1, nc + 1))
    rhs = np.zeros(nr + 1)
    for k, i in enumerate(rows):
        lhs[k, :nc] = u[i, list(cols)]
        lhs[k, nc] = -1.0
    lhs[nr, :nc] = 1.0
    rhs[nr] = 1.0
    if nr == nc:
        try:
            sol = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            log.debug("singular indifference system for rows=%s cols=%s", rows, cols)
            return None
    else:
        sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    if np.max(np.abs(lhs @ sol - rhs)) > 1e-9:
        return None
    return sol[:nc], float(sol[nc])


def _support_candidate(ua: np.ndarray, ub: np.ndarray, rows: tuple[int, ...], cols: tuple[int, ...]):
    sol_q = _indifference_solution(ua, rows, cols)
    sol_p = _indifference_solution(ub.T, cols, rows)
    if sol_q is None or sol_p is None:
        return None
    q_s, va = sol_q
    p_s, vb = sol_p
    if np.any(q_s < -1e-9) or np.any(p_s < -1e-9):
        return None
    q = np.zeros(4)
    p = np.zeros(4)
    q[list(cols)] = np.clip(q_s, 0.0, None)
    p[list(rows)] = np.clip(p_s, 0.0, None)
    q /= q.sum()
    p /= p.sum()
    # no profitable pure deviation outside the supports
    if np.max(ua @ q) > va + 1e-9 or np.max(ub.T @ p) > vb + 1e-9:
        return None
    return p, q


def verify_nash(ua: np.ndarray, ub: np.ndarray, p: np.ndarray, q: np.ndarray, tol: float = 1e-9) -> bool:
    """Direct best-response check of a mixed profile on the bimatrix."""
    va = float(p @ ua @ q)
    vb = float(p @ ub @ q)
    return float(np.max(ua @ q)) <= va + tol and float(np.max(p @ ub)) <= vb + tol


def nash_equilibria(game: GameSpec) -> list[NashEquilibrium]:
    """All Nash equilibria found by support enumeration on the 4x4 bimatrix.

    Every nonempty support pair is tried (unequal sizes via least squares);
    candidates must pass a direct best-response check.  Duplicates (same
    payoff point and induced behavior within 1e-8) are merged; distinct
    behaviors sharing a payoff point collapse to one representative with
    component=True.
    """
    ua, ub = payoff_matrices(game)
    supports = [c for k in range(1, 5) for c in itertools.combinations(range(4), k)]
    found: list[tuple[np.ndarray, np.ndarray]] = []
    for rows in supports:
        for cols in supports:
            cand = _support_candidate(ua, ub, rows, cols)
            if cand is None:
                continue
            p, q = cand
            if verify_nash(ua, ub, p, q):
                found.append((p, q))

    det = _deterministic_behavior_tensor()

    def behavior_of_mix(p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return np.einsum("a,b,abwxyz->wxyz", p, q, det)

    results: list[NashEquilibrium] = []
    seen: dict[tuple, dict[bytes, int]] = {}
    for p, q in found:
        pay = PayoffPoint(float(p @ ua @ q), float(p @ ub @ q))
        pay_key = (round(pay.alice / 1e-8), round(pay.bob / 1e-8))
        beh_key = np.round(behavior_of_mix(p, q) / 1e-8).astype(np.int64).tobytes()
        if pay_key in seen:
            group = seen[pay_key]
            if beh_key not in group:
                group[beh_key] = len(group)
                idx = next(i for i, r in enumerate(results)
                           if (round(r.payoffs.alice / 1e-8), round(r.payoffs.bob / 1e-8)) == pay_key)
                results[idx] = NashEquilibrium(results[idx].mix_a, results[idx].mix_b,
                                               results[idx].payoffs, component=True)
            continue
        seen[pay_key] = {beh_key: 0}
        results.append(NashEquilibrium(p, q, pay))
    results.sort(key=lambda r: (-r.payoffs.alice, -r.payoffs.bob))
    return results


# --- correlated equilibrium -------------------------------------------------

class CorrelatedEquilibriumReport(tuple):
    """(is_equilibrium, max_gain, player) where player is 0/1 or None."""

    __slots__ = ()

    def __new__(cls, is_equilibrium: bool, max_gain: float, player):
        return super().__new__(cls, (bool(is_equilibrium), float(max_gain), player))

    @property
    def is_equilibrium(self) -> bool:
        return self[0]

    @property
    def max_gain(self) -> float:
        return self[1]

    @property
    def player(self):
        return self[2]


def is_correlated_equilibrium(game: GameSpec, cs: CorrelatedStrategy, tol: float = 1e-9) -> CorrelatedEquilibriumReport:
    """Deviation-map test of the correlated-equilibrium conditions.

    For each player all 4^4 maps from recommended to played strategy are
    enumerated; the advice is an equilibrium iff no map beats obedience
    by more than tol.
    """
    ua, ub = payoff_matrices(game)
    w = cs.weights
    # t[r, s]: payoff (weighted by advice) of playing s when recommended r
    t_a = np.einsum("rj,sj->rs", w, ua)
    t_b = np.einsum("ir,is->rs", w, ub)
    worst_gain = -np.inf
    worst_player = None
    for player, t in ((0, t_a), (1, t_b)):
        obey = float(np.trace(t))
        best_dev = -np.inf
        for dev in itertools.product(range(4), repeat=4):
            value = float(sum(t[r, dev[r]] for r in range(4)))
            if value > best_dev:
                best_dev = value
        gain = best_dev - obey
        if gain > worst_gain:
            worst_gain = gain
            worst_player = player
    ok = worst_gain <= tol
    return CorrelatedEquilibriumReport(ok, worst_gain, None if ok else worst_player)


# --- serialization ----------------------------------------------------------

def save_correlated(cs: CorrelatedStrategy, path: str) -> None:
    with open(path, "w") as fh:
        json.dump({"weights": cs.weights.tolist()}, fh, indent=1)


def load_correlated(path: str) -> CorrelatedStrategy:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed correlated-strategy file: {exc}") from exc
    if "weights" not in doc:
        raise ValidationError("incomplete table: missing key 'weights'")
    return CorrelatedStrategy(np.array(doc["weights"], dtype=float))
