"""Two-qubit states, projective qubit measurements and the behaviors they induce.

Measurements are binary POVMs given by a pair of projectors summing to
identity.  The plane-angle family phi_0(t) = cos t |0> + sin t |1>,
phi_1(t) = -sin t |0> + cos t |1> covers every real measurement basis;
Bloch angles (theta, phi) cover complex ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .game import Behavior, ValidationError

HERMITIAN_TOL = 1e-10
PROJECTOR_TOL = 1e-10
STATE_TOL = 1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _as_complex(values, shape: tuple[int, ...], name: str) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.shape != shape:
        raise ValidationError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching eigenvector columns of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ValidationError("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


@dataclass(frozen=True)
class QuantumState:
    """Two-qubit density operator: Hermitian, unit trace, positive semidefinite."""

    rho: np.ndarray

    def __post_init__(self):
        rho = _as_complex(self.rho, (4, 4), "state")
        if np.max(np.abs(rho - rho.conj().T)) > STATE_TOL:
            raise ValidationError("state is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > STATE_TOL:
            raise ValidationError(f"state trace is {np.trace(rho).real!r}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -STATE_TOL:
            raise ValidationError("state is not positive semidefinite")
        object.__setattr__(self, "rho", rho)


def pure_state(vector) -> QuantumState:
    """Density operator of a (normalized) two-qubit state vector."""
    v = np.array(vector, dtype=complex).reshape(4)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-9:
        v = v / norm
    return QuantumState(np.outer(v, v.conj()))


_BELL_VECTORS = (
    np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),   # (|00> + |11>)/sqrt2
    np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),  # (|00> - |11>)/sqrt2
    np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),   # (|01> + |10>)/sqrt2
    np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),  # (|01> - |10>)/sqrt2
)


def phi_plus() -> QuantumState:
    """Maximally entangled state (|00> + |11>)/sqrt(2)."""
    return pure_state(_BELL_VECTORS[0])


def bell_state(k: int) -> QuantumState:
    """Bell basis state k: 0..3 in the order phi+, phi-, psi+, psi-."""
    if not 0 <= k <= 3:
        raise ValidationError(f"Bell state index must be 0..3, got {k!r}")
    return pure_state(_BELL_VECTORS[k])


@dataclass(frozen=True)
class QubitMeasurement:
    """Binary projective qubit measurement: projectors for outcomes 0 and 1."""

    proj0: np.ndarray
    proj1: np.ndarray

    def __post_init__(self):
        p0 = _as_complex(self.proj0, (2, 2), "proj0")
        p1 = _as_complex(self.proj1, (2, 2), "proj1")
        for name, p in (("proj0", p0), ("proj1", p1)):
            if np.max(np.abs(p - p.conj().T)) > PROJECTOR_TOL:
                raise ValidationError(f"{name} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL:
                raise ValidationError(f"{name} is not a projector")
        if np.max(np.abs(p0 + p1 - np.eye(2))) > PROJECTOR_TOL:
            raise ValidationError("projectors do not sum to identity")
        object.__setattr__(self, "proj0", p0)
        object.__setattr__(self, "proj1", p1)

    def projector(self, outcome: int) -> np.ndarray:
        return self.proj0 if outcome == 0 else self.proj1


def measurement_from_angle(theta: float) -> QubitMeasurement:
    """Real-plane measurement with outcome-0 vector cos(theta)|0> + sin(theta)|1>."""
    c, s = np.cos(theta), np.sin(theta)
    v0 = np.array([c, s], dtype=complex)
    v1 = np.array([-s, c], dtype=complex)
    return QubitMeasurement(np.outer(v0, v0.conj()), np.outer(v1, v1.conj()))


def measurement_from_bloch(theta: float, phi: float) -> QubitMeasurement:
    """Measurement along the Bloch direction (theta, phi); outcome 0 is +n."""
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    p0 = 0.5 * (np.eye(2, dtype=complex) + n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z)
    return QubitMeasurement(p0, np.eye(2, dtype=complex) - p0)


def trivial_measurement(action: int) -> QubitMeasurement:
    """Measurement that outputs the given action regardless of the state."""
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    return QubitMeasurement(eye, zero) if action == 0 else QubitMeasurement(zero, eye)


@dataclass(frozen=True)
class QuantumStrategy:
    """Shared state plus one measurement per player per type."""

    state: QuantumState
    alice: tuple[QubitMeasurement, QubitMeasurement]
    bob: tuple[QubitMeasurement, QubitMeasurement]

    def measurements(self, player: int) -> tuple[QubitMeasurement, QubitMeasurement]:
        if player == 0:
            return self.alice
        if player == 1:
            return self.bob
        raise ValueError(f"player must be 0 or 1, got {player!r}")

    def replace(self, player: int, measurements) -> "QuantumStrategy":
        ms = tuple(measurements)
        if player == 0:
            return QuantumStrategy(self.state, ms, self.bob)
        return QuantumStrategy(self.state, self.alice, ms)


OPTIMAL_ANGLES_A = (0.0, np.pi / 4)
OPTIMAL_ANGLES_B = (np.pi / 8, -np.pi / 8)


def optimal_strategy() -> QuantumStrategy:
    """CHSH-optimal measurements on phi+; the fair quantum equilibrium."""
    return QuantumStrategy(
        state=phi_plus(),
        alice=tuple(measurement_from_angle(t) for t in OPTIMAL_ANGLES_A),
        bob=tuple(measurement_from_angle(t) for t in OPTIMAL_ANGLES_B),
    )


_BELL_CORRECTIONS = (
    np.eye(2, dtype=complex),
    PAULI_Z,
    PAULI_X,
    PAULI_X @ PAULI_Z,
)


def rotated_strategy(k: int) -> QuantumStrategy:
    """Optimal-strategy analogue on Bell state k.

    Bell state k equals (I x V_k) phi+, so conjugating Bob's measurements
    by V_k reproduces the phi+ behavior exactly.
    """
    if not 0 <= k <= 3:
        raise ValidationError(f"Bell state index must be 0..3, got {k!r}")
    v = _BELL_CORRECTIONS[k]
    bob = []
    for t in OPTIMAL_ANGLES_B:
        m = measurement_from_angle(t)
        bob.append(QubitMeasurement(v @ m.proj0 @ v.conj().T, v @ m.proj1 @ v.conj().T))
    return QuantumStrategy(
        state=bell_state(k),
        alice=tuple(measurement_from_angle(t) for t in OPTIMAL_ANGLES_A),
        bob=tuple(bob),
    )


def behavior_of_quantum(strategy: QuantumStrategy) -> Behavior:
    """Born-rule behavior p(y|x) = Tr[(P_A^{y_A|x_A} x P_B^{y_B|x_B}) rho]."""
    rt = strategy.state.rho.reshape(2, 2, 2, 2)  # [i, k, j, l] for |i k><j l|
    pa = np.array([[strategy.alice[x].projector(y) for y in range(2)] for x in range(2)])
    pb = np.array([[strategy.bob[x].projector(y) for y in range(2)] for x in range(2)])
    # Tr[(P x Q) rho] = sum P[i,j] Q[k,l] rho[(j,l),(i,k)]
    p = np.einsum("awij,bzkl,jlik->abwz", pa, pb, rt).real
    return Behavior(np.clip(p, 0.0, 1.0))


def chsh_value(behavior: Behavior) -> float:
    """CHSH combination sum_x (-1)^(xA xB) E(x) of the setting correlators."""
    p = behavior.p
    signs = np.array([1.0, -1.0])
    e = np.einsum("abwz,w,z->ab", p, signs, signs)  # E(x) = sum (-1)^(yA+yB) p
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


def chsh_win_probability(behavior: Behavior) -> float:
    """Probability that y_A xor y_B = x_A and x_B under uniform settings."""
    p = behavior.p
    total = 0.0
    for xa in range(2):
        for xb in range(2):
            target = xa & xb
            total += sum(p[xa, xb, ya, ya ^ target] for ya in range(2))
    return float(total / 4.0)


def werner_state(visibility: float) -> QuantumState:
    """phi+ mixed with white noise: v phi+ + (1-v) I/4."""
    _check_visibility(visibility)
    rho = visibility * phi_plus().rho + (1.0 - visibility) * np.eye(4, dtype=complex) / 4.0
    return QuantumState(rho)


def colored_noise_state(visibility: float) -> QuantumState:
    """phi+ mixed with correlated noise (|00><00| + |11><11|)/2."""
    _check_visibility(visibility)
    noise = np.zeros((4, 4), dtype=complex)
    noise[0, 0] = noise[3, 3] = 0.5
    return QuantumState(visibility * phi_plus().rho + (1.0 - visibility) * noise)


def _check_visibility(v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise ValidationError(f"visibility must be in [0, 1], got {v!r}")


def fidelity(state: QuantumState, target: QuantumState) -> float:
    """Overlap <psi| rho |psi> with a pure target state."""
    purity = float(np.trace(target.rho @ target.rho).real)
    if abs(purity - 1.0) > 1e-9:
        raise ValidationError("fidelity target must be a pure state")
    return float(np.trace(state.rho @ target.rho).real)


# --- serialization ----------------------------------------------------------

def _measurement_to_setting(m: QubitMeasurement):
    """Angle (plane measurements) or Bloch pair; rejects rank-0/2 projectors."""
    p0 = m.proj0
    rank = round(np.trace(p0).real)
    if rank != 1:
        raise ValidationError("only rank-1 measurements are serializable")
    nx = float(np.trace(p0 @ PAULI_X).real)
    ny = float(np.trace(p0 @ PAULI_Y).real)
    nz = float(np.trace(p0 @ PAULI_Z).real)
    if abs(ny) < 1e-12:
        # real-plane measurement: Bloch vector (sin 2t, 0, cos 2t) inverts exactly
        return float(np.arctan2(nx, nz) / 2.0)
    theta = float(np.arccos(np.clip(nz, -1.0, 1.0)))
    phi = float(np.arctan2(ny, nx))
    return [theta, phi]


def _setting_to_measurement(setting) -> QubitMeasurement:
    if isinstance(setting, (int, float)):
        return measurement_from_angle(float(setting))
    if isinstance(setting, (list, tuple)) and len(setting) == 2:
        return measurement_from_bloch(float(setting[0]), float(setting[1]))
    raise ValidationError(f"measurement setting must be an angle or [theta, phi], got {setting!r}")


def strategy_to_dict(strategy: QuantumStrategy) -> dict:
    rho = strategy.state.rho
    return {
        "state": [[[z.real, z.imag] for z in row] for row in rho.tolist()],
        "A": [_measurement_to_setting(m) for m in strategy.alice],
        "B": [_measurement_to_setting(m) for m in strategy.bob],
    }


def save_strategy(strategy: QuantumStrategy, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(strategy_to_dict(strategy), fh, indent=1)


def strategy_from_dict(doc: dict) -> QuantumStrategy:
    missing = {"state", "A", "B"} - set(doc)
    if missing:
        raise ValidationError(f"incomplete strategy: missing keys {sorted(missing)}")
    raw = doc["state"]
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError("malformed state matrix") from exc
    if arr.shape != (4, 4, 2):
        raise ValidationError(f"state must be 4x4 complex as [re, im] pairs, got shape {arr.shape}")
    state = QuantumState(arr[..., 0] + 1j * arr[..., 1])
    for key in ("A", "B"):
        if not isinstance(doc[key], list) or len(doc[key]) != 2:
            raise ValidationError(f"'{key}' must list one measurement setting per type")
    alice = tuple(_setting_to_measurement(s) for s in doc["A"])
    bob = tuple(_setting_to_measurement(s) for s in doc["B"])
    return QuantumStrategy(state, alice, bob)


def load_strategy(path: str) -> QuantumStrategy:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed strategy file: {exc}") from exc
    return strategy_from_dict(doc)
