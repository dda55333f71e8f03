"""Two-player Bayesian game with binary types and binary actions.

A game is a prior over type pairs plus one utility table per player.
A behavior is the conditional distribution p(y_A, y_B | x_A, x_B) that
some advice (classical or quantum) induces; expected payoffs are the
prior-weighted average of utilities under the behavior.

All tables are indexed [x_A][x_B][y_A][y_B].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

PRIOR_TOL = 1e-12
BEHAVIOR_TOL = 1e-10


class ValidationError(ValueError):
    """Raised when a game, behavior or serialized file fails validation."""


class PayoffPoint(tuple):
    """Pair of expected payoffs (alice, bob)."""

    __slots__ = ()

    def __new__(cls, alice: float, bob: float):
        return super().__new__(cls, (float(alice), float(bob)))

    @property
    def alice(self) -> float:
        return self[0]

    @property
    def bob(self) -> float:
        return self[1]

    def __repr__(self) -> str:
        return f"PayoffPoint(alice={self[0]!r}, bob={self[1]!r})"


def _frozen_array(values, shape: tuple[int, ...], name: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"incomplete table: {name} is ragged or non-numeric") from exc
    if arr.shape != shape:
        raise ValidationError(f"incomplete table: {name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GameSpec:
    """Prior over type pairs and a utility table per player.

    prior:      shape (2, 2), nonnegative, sums to 1.
    utility_a:  shape (2, 2, 2, 2), Alice's utility u_A(x_A, x_B, y_A, y_B).
    utility_b:  same shape, Bob's utility.
    """

    prior: np.ndarray
    utility_a: np.ndarray
    utility_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "prior", _frozen_array(self.prior, (2, 2), "prior"))
        object.__setattr__(self, "utility_a", _frozen_array(self.utility_a, (2, 2, 2, 2), "utility_a"))
        object.__setattr__(self, "utility_b", _frozen_array(self.utility_b, (2, 2, 2, 2), "utility_b"))
        if np.any(self.prior < -PRIOR_TOL):
            raise ValidationError("prior not normalized: negative entries")
        if abs(float(self.prior.sum()) - 1.0) > PRIOR_TOL:
            raise ValidationError(f"prior not normalized: sums to {float(self.prior.sum())!r}")

    def utility(self, player: int) -> np.ndarray:
        """Utility table of player 0 (Alice) or 1 (Bob)."""
        if player == 0:
            return self.utility_a
        if player == 1:
            return self.utility_b
        raise ValidationError(f"player must be 0 or 1, got {player!r}")


@dataclass(frozen=True)
class Behavior:
    """Conditional outcome distribution p(y_A, y_B | x_A, x_B).

    Each setting's 2x2 block is a probability distribution: entries in
    [0, 1] and summing to 1 within 1e-10.  Inputs outside tolerance are
    rejected rather than renormalized.
    """

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen_array(self.p, (2, 2, 2, 2), "behavior"))
        if np.any(self.p < -BEHAVIOR_TOL) or np.any(self.p > 1.0 + BEHAVIOR_TOL):
            raise ValidationError("behavior entries outside [0, 1]")
        sums = self.p.sum(axis=(2, 3))
        if np.any(np.abs(sums - 1.0) > BEHAVIOR_TOL):
            raise ValidationError(f"behavior not normalized per setting: sums {sums.tolist()}")


class NoSignalingReport(tuple):
    """(is_no_signaling, max_violation) from marginal-consistency checks."""

    __slots__ = ()

    def __new__(cls, is_no_signaling: bool, max_violation: float):
        return super().__new__(cls, (bool(is_no_signaling), float(max_violation)))

    @property
    def is_no_signaling(self) -> bool:
        return self[0]

    @property
    def max_violation(self) -> float:
        return self[1]


def standard_game() -> GameSpec:
    """The built-in conflicting-interest game.

    When x_A AND x_B = 0 the players are rewarded for matching actions,
    with each preferring a different matched outcome (1 vs 1/2); when
    x_A AND x_B = 1 they are rewarded 3/4 each for mismatching.  The
    prior is uniform.  All utilities are dyadic rationals, so float
    arithmetic on them is exact.
    """
    u_a = np.zeros((2, 2, 2, 2))
    u_b = np.zeros((2, 2, 2, 2))
    for xa in range(2):
        for xb in range(2):
            if xa & xb:
                u_a[xa, xb, 0, 1] = u_a[xa, xb, 1, 0] = 0.75
                u_b[xa, xb, 0, 1] = u_b[xa, xb, 1, 0] = 0.75
            else:
                u_a[xa, xb, 0, 0] = 1.0
                u_a[xa, xb, 1, 1] = 0.5
                u_b[xa, xb, 0, 0] = 0.5
                u_b[xa, xb, 1, 1] = 1.0
    prior = np.full((2, 2), 0.25)
    return GameSpec(prior=prior, utility_a=u_a, utility_b=u_b)


def expected_payoffs(game: GameSpec, behavior: Behavior) -> PayoffPoint:
    """Prior-weighted expected utility of each player under a behavior."""
    weighted = game.prior[:, :, None, None] * behavior.p
    return PayoffPoint(
        float(np.sum(weighted * game.utility_a)),
        float(np.sum(weighted * game.utility_b)),
    )


def check_no_signaling(behavior: Behavior, tol: float = 1e-9) -> NoSignalingReport:
    """Check that each player's marginal is independent of the other's setting."""
    p = behavior.p
    # Alice's marginal p(y_A | x_A, x_B) must not depend on x_B, and vice versa.
    marg_a = p.sum(axis=3)  # [xA][xB][yA]
    marg_b = p.sum(axis=2)  # [xA][xB][yB]
    viol_a = np.abs(marg_a[:, 0, :] - marg_a[:, 1, :]).max()
    viol_b = np.abs(marg_b[0, :, :] - marg_b[1, :, :]).max()
    worst = float(max(viol_a, viol_b))
    return NoSignalingReport(worst <= tol, worst)


def pr_box_behavior() -> Behavior:
    """Extremal no-signaling behavior: outputs satisfy y_A xor y_B = x_A and x_B.

    Uniform over the two satisfying outcome pairs for every setting.
    """
    p = np.zeros((2, 2, 2, 2))
    for xa in range(2):
        for xb in range(2):
            target = xa & xb
            for ya in range(2):
                p[xa, xb, ya, ya ^ target] = 0.5
    return Behavior(p)


def has_swap_symmetry(game: GameSpec) -> bool:
    """True iff u_A(x, not y_A, not y_B) == u_B(x, y_A, y_B) everywhere."""
    flipped = game.utility_a[:, :, ::-1, ::-1]
    return bool(np.array_equal(flipped, game.utility_b))


def symmetrize(behavior: Behavior) -> Behavior:
    """Average a behavior with its outcome-complemented version.

    p'(y|x) = (p(y_A, y_B | x) + p(not y_A, not y_B | x)) / 2.  For games
    with swap symmetry this equalizes the two payoffs at their mean.
    Idempotent.
    """
    p = behavior.p
    return Behavior(0.5 * (p + p[:, :, ::-1, ::-1]))


# --- serialization ----------------------------------------------------------

def game_to_dict(game: GameSpec) -> dict:
    return {
        "prior": game.prior.tolist(),
        "uA": game.utility_a.tolist(),
        "uB": game.utility_b.tolist(),
    }


def save_game(game: GameSpec, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(game_to_dict(game), fh, indent=1)


def load_game(path: str) -> GameSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed game file: {exc}") from exc
    missing = {"prior", "uA", "uB"} - set(doc)
    if missing:
        raise ValidationError(f"incomplete table: missing keys {sorted(missing)}")
    return GameSpec(prior=doc["prior"], utility_a=doc["uA"], utility_b=doc["uB"])


def behavior_to_dict(behavior: Behavior) -> dict:
    return {"p": behavior.p.tolist()}


def save_behavior(behavior: Behavior, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(behavior_to_dict(behavior), fh, indent=1)


def load_behavior(path: str) -> Behavior:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed behavior file: {exc}") from exc
    if "p" not in doc:
        raise ValidationError("incomplete table: missing key 'p'")
    return Behavior(p=doc["p"])
