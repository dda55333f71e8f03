"""Best responses, equilibrium verification and see-saw payoff optimization.

With the opponent's measurements and the shared state fixed, a player's
expected payoff is linear in their own measurement operators: one
effective 2x2 Hermitian operator per (own type, own outcome).  The best
response is therefore exact — project onto the nonnegative eigenspace
of the per-type operator difference — with no numerical search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import max_weighted_classical, strategy_action
from .game import GameSpec, PayoffPoint, ValidationError, expected_payoffs
from .quantum import (
    QuantumState,
    QuantumStrategy,
    QubitMeasurement,
    behavior_of_quantum,
    hermitian_eig,
    measurement_from_bloch,
    phi_plus,
    trivial_measurement,
)

ALICE, BOB = 0, 1

ZERO_EIG_TOL = 1e-12


def _partial_trace_against(rho: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    """Tr_axis[(op on axis) rho] as an operator on the other qubit."""
    rt = rho.reshape(2, 2, 2, 2)  # [i, k, j, l] for |i k><j l|
    if axis == 1:
        return np.einsum("kl,iljk->ij", op, rt)
    return np.einsum("ij,jkil->kl", op, rt)


def effective_payoff_operators(
    game: GameSpec, strategy: QuantumStrategy, player: int, own_type: int,
    utility: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Effective operators (G0, G1) for the player's measurement at own_type.

    The player's payoff contribution from this type is
    Tr(P0 G0) + Tr(P1 G1) for any binary POVM (P0, P1); G includes the
    prior and the opponent's fixed measurements.  An explicit utility
    table overrides the player's own (used for weighted objectives).
    """
    if utility is None:
        utility = game.utility(player)
    rho = strategy.state.rho
    other = strategy.measurements(1 - player)
    gs = [np.zeros((2, 2), dtype=complex), np.zeros((2, 2), dtype=complex)]
    for own_outcome in range(2):
        for other_type in range(2):
            for other_outcome in range(2):
                kraus = _partial_trace_against(rho, other[other_type].projector(other_outcome), axis=1 - player)
                if player == ALICE:
                    w = game.prior[own_type, other_type] * utility[own_type, other_type, own_outcome, other_outcome]
                else:
                    w = game.prior[other_type, own_type] * utility[other_type, own_type, other_outcome, own_outcome]
                gs[own_outcome] += w * kraus
    return gs[0], gs[1]


@dataclass(frozen=True)
class BestResponseReport:
    """Result of an exact single-player best response.

    replacements:  optimal measurement per own type.
    current_value / optimal_value:  the player's objective before/after.
    gain:  optimal_value - current_value (>= 0 up to rounding).
    degenerate_types:  types whose difference operator had a (near-)zero
    eigenvalue; the zero eigenspace is assigned to outcome 0.
    """

    player: int
    replacements: tuple[QubitMeasurement, QubitMeasurement]
    current_value: float
    optimal_value: float
    gain: float
    degenerate_types: tuple[int, ...]


def _player_value(game: GameSpec, strategy: QuantumStrategy, player: int,
                  utility: np.ndarray | None = None) -> float:
    behavior = behavior_of_quantum(strategy)
    if utility is None:
        utility = game.utility(player)
    return float(np.sum(game.prior[:, :, None, None] * behavior.p * utility))


def best_response(game: GameSpec, strategy: QuantumStrategy, player: int,
                  utility: np.ndarray | None = None) -> BestResponseReport:
    """Exact best response for one player, opponent and state held fixed."""
    if player not in (ALICE, BOB):
        raise ValueError(f"player must be 0 or 1, got {player!r}")
    current = _player_value(game, strategy, player, utility)
    replacements = []
    optimal = 0.0
    degenerate = []
    for own_type in range(2):
        g0, g1 = effective_payoff_operators(game, strategy, player, own_type, utility)
        diff = g0 - g1
        w, v = hermitian_eig(diff)
        if np.any(np.abs(w) <= ZERO_EIG_TOL):
            degenerate.append(own_type)
        keep = w >= -ZERO_EIG_TOL  # zero eigenspace goes to outcome 0
        p0 = (v[:, keep] @ v[:, keep].conj().T) if np.any(keep) else np.zeros((2, 2), dtype=complex)
        p0 = 0.5 * (p0 + p0.conj().T)
        replacements.append(QubitMeasurement(p0, np.eye(2, dtype=complex) - p0))
        optimal += float(np.trace(g1).real) + float(w[keep].sum())
    return BestResponseReport(
        player=player,
        replacements=tuple(replacements),
        current_value=current,
        optimal_value=optimal,
        gain=optimal - current,
        degenerate_types=tuple(degenerate),
    )


class VerificationReport(tuple):
    """(is_equilibrium, max_gain) over both players' best responses."""

    __slots__ = ()

    def __new__(cls, is_equilibrium: bool, max_gain: float):
        return super().__new__(cls, (bool(is_equilibrium), float(max_gain)))

    @property
    def is_equilibrium(self) -> bool:
        return self[0]

    @property
    def max_gain(self) -> float:
        return self[1]


def verify_quantum_equilibrium(game: GameSpec, strategy: QuantumStrategy,
                               tol: float = 1e-8) -> VerificationReport:
    """Equilibrium iff neither player's exact best response gains more than tol."""
    gains = [best_response(game, strategy, p).gain for p in (ALICE, BOB)]
    worst = float(max(gains))
    return VerificationReport(worst <= tol, worst)


# --- see-saw ----------------------------------------------------------------

@dataclass(frozen=True)
class SeesawResult:
    """Final strategy of an alternating-best-response run.

    trace holds the weighted objective at the initial point and after
    each player update; it is non-decreasing.
    """

    strategy: QuantumStrategy
    objective: float
    payoffs: PayoffPoint
    trace: tuple[float, ...]
    converged: bool
    iterations: int


def weighted_utility(game: GameSpec, w_a: float, w_b: float) -> np.ndarray:
    return w_a * game.utility_a + w_b * game.utility_b


def weighted_payoff_operator(game: GameSpec, strategy: QuantumStrategy,
                             w_a: float, w_b: float) -> np.ndarray:
    """4x4 operator R with Tr(rho R) = w_a F_A + w_b F_B for these measurements."""
    util = weighted_utility(game, w_a, w_b)
    r = np.zeros((4, 4), dtype=complex)
    for xa in range(2):
        for xb in range(2):
            for ya in range(2):
                for yb in range(2):
                    w = game.prior[xa, xb] * util[xa, xb, ya, yb]
                    if w == 0.0:
                        continue
                    r += w * np.kron(strategy.alice[xa].projector(ya),
                                     strategy.bob[xb].projector(yb))
    return r


def seesaw(game: GameSpec, w_a: float, w_b: float, init: QuantumStrategy,
           max_iters: int = 500, tol: float = 1e-10,
           optimize_state: bool = False) -> SeesawResult:
    """Alternating exact best responses on the weighted utility w_a u_A + w_b u_B.

    Both players maximize the same blended objective, so every step is
    monotone.  The state is held fixed unless optimize_state is set, in
    which case it is replaced by the top eigenvector of the weighted
    payoff operator after each round.
    """
    util = weighted_utility(game, w_a, w_b)
    strategy = init
    value = _player_value(game, strategy, ALICE, util)
    trace = [value]
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        before = trace[-1]
        for player in (ALICE, BOB):
            report = best_response(game, strategy, player, util)
            strategy = strategy.replace(player, report.replacements)
            trace.append(report.optimal_value)
        if optimize_state:
            w, v = hermitian_eig(weighted_payoff_operator(game, strategy, w_a, w_b))
            top = v[:, 0]
            strategy = QuantumStrategy(QuantumState(np.outer(top, top.conj())),
                                       strategy.alice, strategy.bob)
            trace.append(_player_value(game, strategy, ALICE, util))
        if trace[-1] - before < tol:
            converged = True
            break
    payoffs = expected_payoffs(game, behavior_of_quantum(strategy))
    return SeesawResult(
        strategy=strategy,
        objective=float(trace[-1]),
        payoffs=payoffs,
        trace=tuple(float(t) for t in trace),
        converged=converged,
        iterations=iterations,
    )


def random_measurements(rng: np.random.Generator) -> tuple[QubitMeasurement, QubitMeasurement]:
    """One uniformly random Bloch-direction measurement per type."""
    out = []
    for _ in range(2):
        z = rng.uniform(-1.0, 1.0)
        phi = rng.uniform(0.0, 2.0 * np.pi)
        out.append(measurement_from_bloch(float(np.arccos(z)), float(phi)))
    return tuple(out)


def _deterministic_strategy(state: QuantumState, s_a: int, s_b: int) -> QuantumStrategy:
    return QuantumStrategy(
        state,
        tuple(trivial_measurement(strategy_action(s_a, t)) for t in range(2)),
        tuple(trivial_measurement(strategy_action(s_b, t)) for t in range(2)),
    )


def seesaw_best_of(game: GameSpec, w_a: float, w_b: float, restarts: int = 20,
                   seed: int = 0, state: QuantumState | None = None,
                   max_iters: int = 500, tol: float = 1e-10,
                   optimize_state: bool = False) -> SeesawResult:
    """Best see-saw result over seeded restarts.

    Restart 0 starts from the best deterministic strategy pair for these
    weights (so the result never falls below the classical optimum); the
    rest start from random Bloch measurements.
    """
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    if state is None:
        state = phi_plus()
    _, best_pair = max_weighted_classical(game, w_a, w_b)
    best: SeesawResult | None = None
    for r in range(restarts):
        if r == 0:
            init = _deterministic_strategy(state, *best_pair)
        else:
            rng = np.random.default_rng([seed, r])
            init = QuantumStrategy(state, random_measurements(rng), random_measurements(rng))
        result = seesaw(game, w_a, w_b, init, max_iters=max_iters, tol=tol,
                        optimize_state=optimize_state)
        if best is None or result.objective > best.objective:
            best = result
    assert best is not None
    return best


# --- region sampling --------------------------------------------------------

@dataclass(frozen=True)
class RegionSample:
    w_a: float
    w_b: float
    payoffs: PayoffPoint
    objective: float
    converged: bool


def default_weight_grid(n: int = 33) -> list[tuple[float, float]]:
    """n weight directions spanning the first quadrant, max-normalized.

    Includes (1, 0), (1, 1) and (0, 1) for n >= 3 odd.
    """
    if n < 2:
        raise ValueError("grid needs at least 2 directions")
    grid = []
    for k in range(n):
        if 2 * k == n - 1:
            grid.append((1.0, 1.0))
            continue
        angle = (np.pi / 2) * k / (n - 1)
        wa, wb = np.cos(angle), np.sin(angle)
        scale = max(wa, wb)
        wa, wb = float(wa / scale), float(wb / scale)
        grid.append((0.0 if abs(wa) < 1e-15 else wa, 0.0 if abs(wb) < 1e-15 else wb))
    return grid


def quantum_region_sample(game: GameSpec, weight_grid, restarts: int = 20,
                          seed: int = 0) -> list[RegionSample]:
    """See-saw payoff samples along a grid of weight directions.

    Each grid task derives its RNG streams from (seed, task index), so
    results are reproducible regardless of execution order.
    """
    samples = []
    for idx, (w_a, w_b) in enumerate(weight_grid):
        best = seesaw_best_of(game, w_a, w_b, restarts=restarts, seed=seed * 100003 + idx)
        samples.append(RegionSample(
            w_a=float(w_a), w_b=float(w_b),
            payoffs=best.payoffs,
            objective=best.objective,
            converged=best.converged,
        ))
    return samples
