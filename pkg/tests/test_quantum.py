import numpy as np
import pytest

from conflictgame import (
    QuantumState,
    QuantumStrategy,
    QubitMeasurement,
    ValidationError,
    behavior_of_quantum,
    bell_state,
    check_no_signaling,
    chsh_value,
    chsh_win_probability,
    colored_noise_state,
    expected_payoffs,
    fidelity,
    load_strategy,
    measurement_from_angle,
    measurement_from_bloch,
    optimal_strategy,
    phi_plus,
    pure_state,
    rotated_strategy,
    save_strategy,
    standard_game,
    werner_state,
)
from conflictgame.quantum import (
    OPTIMAL_ANGLES_A,
    OPTIMAL_ANGLES_B,
    hermitian_eig,
    strategy_from_dict,
    strategy_to_dict,
    trivial_measurement,
)

EQUILIBRIUM_PAYOFF = 0.75 * np.cos(np.pi / 8) ** 2  # 0.6401650429449553
TSIRELSON = 2.0 * np.sqrt(2.0)


def random_strategy(rng):
    from conflictgame.equilibrium import random_measurements
    vec = rng.normal(size=4) + 1j * rng.normal(size=4)
    return QuantumStrategy(
        state=pure_state(vec),
        alice=random_measurements(rng),
        bob=random_measurements(rng),
    )


def test_phi_plus_and_bell_states():
    rho = phi_plus().rho
    want = np.zeros((4, 4))
    want[np.ix_([0, 3], [0, 3])] = 0.5
    np.testing.assert_allclose(rho, want, atol=1e-15)
    for k in range(4):
        b = bell_state(k)
        assert np.trace(b.rho) == pytest.approx(1.0)
        # pure: rho^2 == rho
        np.testing.assert_allclose(b.rho @ b.rho, b.rho, atol=1e-14)
    # the four Bell states are mutually orthogonal
    for j in range(4):
        for k in range(j + 1, 4):
            assert abs(np.trace(bell_state(j).rho @ bell_state(k).rho)) < 1e-14
    with pytest.raises(ValidationError):
        bell_state(4)


def test_state_validation():
    with pytest.raises(ValidationError):
        QuantumState(np.eye(4))  # trace 4
    m = np.eye(4) / 4
    m[0, 1] = 0.5  # not Hermitian
    with pytest.raises(ValidationError):
        QuantumState(m)
    h = np.diag([0.75, 0.75, -0.25, -0.25])
    with pytest.raises(ValidationError):
        QuantumState(h)  # negative eigenvalue
    v = np.array([1.0, 1.0, 0.0, 0.0])
    s = pure_state(v)  # unnormalized input is rescaled
    assert np.trace(s.rho) == pytest.approx(1.0)


def test_measurement_from_angle():
    for theta in np.linspace(-np.pi, np.pi, 17):
        m = measurement_from_angle(theta)
        p0, p1 = m.proj0, m.proj1
        np.testing.assert_allclose(p0 + p1, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(p0 @ p0, p0, atol=1e-14)
        np.testing.assert_allclose(p1 @ p1, p1, atol=1e-14)
        np.testing.assert_allclose(p0 @ p1, np.zeros((2, 2)), atol=1e-14)
        # |cos t, sin t> is the 0 outcome
        v = np.array([np.cos(theta), np.sin(theta)])
        np.testing.assert_allclose(p0 @ v, v, atol=1e-12)
    assert measurement_from_angle(0.0).projector(0)[0, 0] == pytest.approx(1.0)


def test_measurement_from_bloch_plane_consistency():
    # phi=0 Bloch measurements coincide with plane-angle measurements
    for theta in np.linspace(0, np.pi / 2, 9):
        a = measurement_from_angle(theta)
        b = measurement_from_bloch(2 * theta, 0.0)
        np.testing.assert_allclose(a.proj0, b.proj0, atol=1e-12)


def test_measurement_validation():
    with pytest.raises(ValidationError):
        QubitMeasurement(np.eye(2) * 0.5, np.eye(2) * 0.5)  # not projectors
    p0 = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValidationError):
        QubitMeasurement(p0, p0)  # not complete
    t = trivial_measurement(1)
    np.testing.assert_allclose(t.proj0, np.zeros((2, 2)), atol=0)
    np.testing.assert_allclose(t.proj1, np.eye(2), atol=0)


def test_hermitian_eig_orders_descending():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = a + a.conj().T
        w, v = hermitian_eig(h)
        assert all(w[i] >= w[i + 1] - 1e-12 for i in range(len(w) - 1))
        np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-10)
    with pytest.raises(ValidationError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_optimal_strategy_payoffs():
    g = standard_game()
    s = optimal_strategy()
    for t in (0, 1):
        np.testing.assert_allclose(
            s.measurements(0)[t].proj0, measurement_from_angle(OPTIMAL_ANGLES_A[t]).proj0, atol=0)
        np.testing.assert_allclose(
            s.measurements(1)[t].proj0, measurement_from_angle(OPTIMAL_ANGLES_B[t]).proj0, atol=0)
    beh = behavior_of_quantum(s)
    pay = expected_payoffs(g, beh)
    assert pay.alice == pytest.approx(EQUILIBRIUM_PAYOFF, abs=1e-12)
    assert pay.bob == pytest.approx(EQUILIBRIUM_PAYOFF, abs=1e-12)
    assert pay.alice + pay.bob == pytest.approx(1.5 * np.cos(np.pi / 8) ** 2, abs=1e-12)


def test_chsh_at_optimum():
    beh = behavior_of_quantum(optimal_strategy())
    s = chsh_value(beh)
    assert s == pytest.approx(TSIRELSON, abs=1e-12)
    assert chsh_win_probability(beh) == pytest.approx(np.cos(np.pi / 8) ** 2, abs=1e-12)
    # affine relation between the two scores holds for any behavior
    rng = np.random.default_rng(5)
    for _ in range(100):
        raw = rng.random((2, 2, 2, 2))
        raw /= raw.sum(axis=(2, 3), keepdims=True)
        from conflictgame import Behavior
        b = Behavior(raw)
        assert chsh_value(b) == pytest.approx(8 * chsh_win_probability(b) - 4, abs=1e-12)


def test_rotated_strategies_all_equivalent():
    g = standard_game()
    base = behavior_of_quantum(optimal_strategy())
    for k in range(4):
        s = rotated_strategy(k)
        beh = behavior_of_quantum(s)
        np.testing.assert_allclose(beh.p, base.p, atol=1e-12)
        pay = expected_payoffs(g, beh)
        assert pay.alice == pytest.approx(EQUILIBRIUM_PAYOFF, abs=1e-10)
        assert pay.bob == pytest.approx(EQUILIBRIUM_PAYOFF, abs=1e-10)


def test_quantum_behaviors_are_no_signaling():
    # any state + local measurements gives a no-signaling behavior
    rng = np.random.default_rng(123)
    for _ in range(1000):
        beh = behavior_of_quantum(random_strategy(rng))
        rep = check_no_signaling(beh, tol=1e-9)
        assert rep.is_no_signaling, rep.max_violation


def test_quantum_chsh_within_tsirelson():
    rng = np.random.default_rng(321)
    for _ in range(300):
        s = chsh_value(behavior_of_quantum(random_strategy(rng)))
        assert abs(s) <= TSIRELSON + 1e-9


def test_noise_states():
    assert fidelity(werner_state(1.0), phi_plus()) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(werner_state(0.0), phi_plus()) == pytest.approx(0.25, abs=1e-12)
    # visibility v gives fidelity (1+3v)/4 for isotropic noise, (1+v)/2 for colored
    for v in (0.3, 0.7, 0.9):
        assert fidelity(werner_state(v), phi_plus()) == pytest.approx((1 + 3 * v) / 4, abs=1e-12)
        assert fidelity(colored_noise_state(v), phi_plus()) == pytest.approx((1 + v) / 2, abs=1e-12)
    with pytest.raises(ValidationError):
        werner_state(1.5)
    with pytest.raises(ValidationError):
        colored_noise_state(-0.1)


def test_colored_noise_keeps_correlations():
    # colored noise mixes in classical same-outcome correlations, not white noise
    rho = colored_noise_state(0.0).rho
    np.testing.assert_allclose(np.diag(rho), [0.5, 0.0, 0.0, 0.5], atol=1e-14)
    np.testing.assert_allclose(rho[0, 3], 0.0, atol=1e-14)


def test_werner_chsh_scaling():
    a = optimal_strategy()
    for v in (0.2, 0.6, 0.935):
        s = QuantumStrategy(state=werner_state(v), alice=a.alice, bob=a.bob)
        assert chsh_value(behavior_of_quantum(s)) == pytest.approx(v * TSIRELSON, abs=1e-10)
    # colored noise: S = sqrt(2) (1 + v) at these angles
    for v in (0.2, 0.6):
        s = QuantumStrategy(state=colored_noise_state(v), alice=a.alice, bob=a.bob)
        assert chsh_value(behavior_of_quantum(s)) == pytest.approx(np.sqrt(2) * (1 + v), abs=1e-10)


def test_strategy_roundtrip(tmp_path):
    path = tmp_path / "strategy.json"
    for k in range(4):
        s = rotated_strategy(k)
        save_strategy(s, str(path))
        s2 = load_strategy(str(path))
        np.testing.assert_allclose(s2.state.rho, s.state.rho, atol=1e-12)
        for player in (0, 1):
            for t in (0, 1):
                np.testing.assert_allclose(
                    s2.measurements(player)[t].proj0,
                    s.measurements(player)[t].proj0,
                    atol=1e-12,
                )


def test_strategy_roundtrip_out_of_plane(tmp_path):
    # measurements with a y component serialize as [theta, phi] pairs
    s = QuantumStrategy(
        state=phi_plus(),
        alice=(measurement_from_bloch(0.3, 1.1), measurement_from_bloch(2.0, -0.4)),
        bob=(measurement_from_angle(0.1), measurement_from_bloch(1.0, np.pi / 2)),
    )
    path = tmp_path / "strategy.json"
    save_strategy(s, str(path))
    s2 = load_strategy(str(path))
    np.testing.assert_allclose(
        behavior_of_quantum(s2).p, behavior_of_quantum(s).p, atol=1e-12
    )


def test_strategy_dict_errors():
    s = optimal_strategy()
    doc = strategy_to_dict(s)
    bad = dict(doc)
    del bad["state"]
    with pytest.raises(ValidationError, match="missing"):
        strategy_from_dict(bad)
    bad = dict(doc)
    bad["A"] = doc["A"][:1]
    with pytest.raises(ValidationError):
        strategy_from_dict(bad)


def test_fidelity_requires_pure_target():
    with pytest.raises(ValidationError):
        fidelity(phi_plus(), werner_state(0.5))
