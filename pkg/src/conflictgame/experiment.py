"""Monte Carlo simulation of a photon-pair test of the standard game.

A source model fixes the two-qubit state (ideal, white-noise or
correlated-noise mixtures, or a custom density matrix), the measurement
angles, and an accidental-coincidence rate.  Each run draws a uniformly
random setting pair, samples outcomes from the Born-rule behavior, and
with the accidental rate replaces the outcome pair by a uniform one.
Tallies, behavior estimates with normal-approximation confidence
half-widths, and the standard accidental correction follow.

Randomness comes from the counter-based Philox generator keyed by
(seed, block index); runs are partitioned into fixed-size blocks so the
tally is reproducible and blocks could be simulated concurrently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .game import Behavior, GameSpec, PayoffPoint, ValidationError, expected_payoffs
from .quantum import (
    QuantumState,
    QuantumStrategy,
    behavior_of_quantum,
    colored_noise_state,
    measurement_from_angle,
    phi_plus,
    werner_state,
)

NOISE_KINDS = ("werner", "colored", "custom")

DEFAULT_ANGLES_A = (0.0, np.pi / 4)
DEFAULT_ANGLES_B = (np.pi / 8, -np.pi / 8)

BLOCK_SIZE = 1 << 16
LOW_COUNT_THRESHOLD = 100
CONFIDENCE_Z = 1.96  # 95% normal approximation

TSIRELSON = 2.0 * np.sqrt(2.0)


@dataclass(frozen=True)
class SourceModel:
    """Noisy entangled-pair source with fixed measurement angles."""

    noise: str = "werner"
    visibility: float = 1.0
    accidental_rate: float = 0.0
    custom_state: QuantumState | None = None
    angles_a: tuple[float, float] = DEFAULT_ANGLES_A
    angles_b: tuple[float, float] = DEFAULT_ANGLES_B

    def __post_init__(self):
        if self.noise not in NOISE_KINDS:
            raise ValidationError(f"noise must be one of {NOISE_KINDS}, got {self.noise!r}")
        if self.noise == "custom" and self.custom_state is None:
            raise ValidationError("custom noise requires custom_state")
        if not 0.0 <= self.accidental_rate < 1.0:
            raise ValidationError(f"accidental rate must be in [0, 1), got {self.accidental_rate!r}")
        if self.noise != "custom" and not 0.0 <= self.visibility <= 1.0:
            raise ValidationError(f"visibility must be in [0, 1], got {self.visibility!r}")

    def state(self) -> QuantumState:
        if self.noise == "custom":
            assert self.custom_state is not None
            return self.custom_state
        if self.noise == "werner":
            return werner_state(self.visibility)
        return colored_noise_state(self.visibility)

    def strategy(self) -> QuantumStrategy:
        return QuantumStrategy(
            state=self.state(),
            alice=tuple(measurement_from_angle(t) for t in self.angles_a),
            bob=tuple(measurement_from_angle(t) for t in self.angles_b),
        )

    def behavior(self) -> Behavior:
        """Born-rule behavior before accidentals."""
        return behavior_of_quantum(self.strategy())


@dataclass(frozen=True)
class TallyTable:
    """Coincidence counts per setting and outcome pair.

    Raw simulation tallies are integers; accidental correction yields
    real-valued counts.  seed is None for tables not produced by the
    simulator (e.g. read from CSV).
    """

    counts: np.ndarray
    n_runs: int
    seed: int | None = None

    def __post_init__(self):
        counts = np.array(self.counts, dtype=float)
        if counts.shape != (2, 2, 2, 2):
            raise ValidationError(f"counts must have shape (2, 2, 2, 2), got {counts.shape}")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise ValidationError("counts must be finite and nonnegative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    def setting_totals(self) -> np.ndarray:
        return self.counts.sum(axis=(2, 3))


def simulate_runs(model: SourceModel, n: int, seed: int) -> TallyTable:
    """Tally n runs of the source; deterministic in (model, n, seed)."""
    if n < 1:
        raise ValidationError(f"number of runs must be positive, got {n!r}")
    if not 0 <= seed < 2**64:
        raise ValidationError("seed must fit in 64 bits")
    cums = np.cumsum(model.behavior().p.reshape(4, 4), axis=1)
    cums[:, -1] = 1.0  # close rounding gap at the top bin
    rate = model.accidental_rate
    counts = np.zeros(16, dtype=np.int64)
    done, block = 0, 0
    while done < n:
        size = min(BLOCK_SIZE, n - done)
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, block], dtype=np.uint64)))
        settings = rng.integers(0, 4, size)
        draws = rng.random(size)
        outcomes = (draws[:, None] > cums[settings]).sum(axis=1)
        if rate > 0.0:
            accidental = rng.random(size) < rate
            hits = int(accidental.sum())
            if hits:
                outcomes[accidental] = rng.integers(0, 4, hits)
        counts += np.bincount(settings * 4 + outcomes, minlength=16)
        done += size
        block += 1
    return TallyTable(counts.reshape(2, 2, 2, 2), n_runs=n, seed=seed)


def accidental_correction(tally: TallyTable, rate: float) -> TallyTable:
    """Subtract the expected uniform accidental background and rescale.

    N'(y|x) = (N(y|x) - rate * total(x) / 4) / (1 - rate), clamped at 0.
    """
    if not 0.0 <= rate < 1.0:
        raise ValidationError(f"accidental rate must be in [0, 1), got {rate!r}")
    totals = tally.setting_totals()
    corrected = (tally.counts - rate * totals[:, :, None, None] / 4.0) / (1.0 - rate)
    return TallyTable(np.clip(corrected, 0.0, None), n_runs=tally.n_runs, seed=tally.seed)


@dataclass(frozen=True)
class BehaviorEstimate:
    """Estimated behavior with per-entry 95% half-widths and low-count flags."""

    behavior: Behavior
    half_width: np.ndarray
    low_count_settings: tuple[tuple[int, int], ...]


def estimate_behavior(tally: TallyTable) -> BehaviorEstimate:
    totals = tally.setting_totals()
    low = []
    for xa in range(2):
        for xb in range(2):
            if totals[xa, xb] == 0:
                raise ValidationError(f"setting ({xa}, {xb}) has no counts")
            if totals[xa, xb] < LOW_COUNT_THRESHOLD:
                low.append((xa, xb))
    p = tally.counts / totals[:, :, None, None]
    p_clip = np.clip(p, 0.0, 1.0)
    half_width = CONFIDENCE_Z * np.sqrt(p_clip * (1.0 - p_clip) / totals[:, :, None, None])
    return BehaviorEstimate(Behavior(p), half_width, tuple(low))


@dataclass(frozen=True)
class PayoffEstimate:
    """Payoff point from an estimated behavior, with propagated half-widths."""

    payoffs: PayoffPoint
    half_widths: tuple[float, float]


def estimated_payoffs(tally: TallyTable, game: GameSpec) -> PayoffEstimate:
    """Plug-in payoff estimate; half-widths propagate entrywise in quadrature."""
    est = estimate_behavior(tally)
    payoffs = expected_payoffs(game, est.behavior)
    widths = []
    for utility in (game.utility_a, game.utility_b):
        coef = game.prior[:, :, None, None] * utility
        widths.append(float(np.sqrt(np.sum((coef * est.half_width) ** 2))))
    return PayoffEstimate(payoffs, (widths[0], widths[1]))


def visibility_from_fidelity(fidelity: float, kind: str = "werner") -> float:
    """Visibility whose noise model has the given overlap with the ideal state."""
    if kind == "werner":
        # F = v + (1 - v)/4
        if not 0.25 <= fidelity <= 1.0:
            raise ValidationError(f"werner fidelity must be in [0.25, 1], got {fidelity!r}")
        return (4.0 * fidelity - 1.0) / 3.0
    if kind == "colored":
        # F = v + (1 - v)/2
        if not 0.5 <= fidelity <= 1.0:
            raise ValidationError(f"colored fidelity must be in [0.5, 1], got {fidelity!r}")
        return 2.0 * fidelity - 1.0
    raise ValidationError(f"kind must be 'werner' or 'colored', got {kind!r}")


def visibility_from_chsh(chsh: float, kind: str = "werner") -> float:
    """Visibility at which the default angles yield the given CHSH value."""
    if kind == "werner":
        v = chsh / TSIRELSON
    elif kind == "colored":
        # colored noise keeps a sqrt(2) background: S(v) = sqrt(2) (1 + v)
        v = chsh / np.sqrt(2.0) - 1.0
    else:
        raise ValidationError(f"kind must be 'werner' or 'colored', got {kind!r}")
    if not 0.0 <= v <= 1.0:
        raise ValidationError(f"CHSH value {chsh!r} is outside the {kind} model's range")
    return float(v)


# --- serialization ----------------------------------------------------------

def write_tally_csv(tally: TallyTable, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["xA", "xB", "yA", "yB", "count"])
        for xa in range(2):
            for xb in range(2):
                for ya in range(2):
                    for yb in range(2):
                        count = tally.counts[xa, xb, ya, yb]
                        writer.writerow([xa, xb, ya, yb, int(count) if count == int(count) else count])


def read_tally_csv(path: str) -> TallyTable:
    counts = np.zeros((2, 2, 2, 2))
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"xA", "xB", "yA", "yB", "count"}
        if reader.fieldnames is None or expected - set(reader.fieldnames):
            raise ValidationError(f"tally CSV must have columns {sorted(expected)}")
        for row in reader:
            try:
                xa, xb, ya, yb = (int(row[k]) for k in ("xA", "xB", "yA", "yB"))
                value = float(row["count"])
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"malformed tally row {row!r}") from exc
            if not all(v in (0, 1) for v in (xa, xb, ya, yb)):
                raise ValidationError(f"tally indices must be bits, got {row!r}")
            counts[xa, xb, ya, yb] = value
    return TallyTable(counts, n_runs=int(round(float(counts.sum()))), seed=None)
