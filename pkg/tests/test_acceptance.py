"""End-to-end acceptance gate.

One test per shipped guarantee.  Each records a single PASS/FAIL line;
the conftest terminal-summary hook prints them after the run, where they
survive output capture.
"""

import time
from fractions import Fraction

import numpy as np

from conflictgame import (
    Behavior,
    QuantumStrategy,
    SourceModel,
    accidental_correction,
    behavior_of_quantum,
    best_response,
    build_moment_structure,
    check_no_signaling,
    chsh_functional,
    default_weight_grid,
    estimate_behavior,
    estimated_payoffs,
    expected_payoffs,
    max_weighted_classical,
    nash_equilibria,
    npa_upper_bound,
    optimal_strategy,
    payoff_matrices,
    pr_box_behavior,
    pure_state,
    quantum_region_sample,
    region_upper_boundary,
    rotated_strategy,
    seesaw,
    seesaw_best_of,
    simulate_runs,
    solve_sdp,
    standard_game,
    symmetrize,
    verify_nash,
    verify_quantum_equilibrium,
    visibility_from_chsh,
)
from conflictgame.equilibrium import effective_payoff_operators, random_measurements
from conflictgame.quantum import PAULI_X, PAULI_Y, PAULI_Z

COS8SQ = np.cos(np.pi / 8) ** 2
FAIR_PAYOFF = 0.75 * COS8SQ            # 0.6401650429449553
JOINT_MAX = 1.5 * COS8SQ               # 1.2803300858899106
TSIRELSON = 2.0 * np.sqrt(2.0)


RESULT_LINES: list[str] = []


def record(name: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    suffix = f"  [{detail}]" if detail else ""
    RESULT_LINES.append(f"{verdict}  {name}{suffix}")
    assert ok, f"{name}{suffix}"


def random_strategy(rng):
    vec = rng.normal(size=4) + 1j * rng.normal(size=4)
    return QuantumStrategy(
        state=pure_state(vec),
        alice=random_measurements(rng),
        bob=random_measurements(rng),
    )


def best_time(fn, repeats: int = 5) -> float:
    # scheduler noise dominates at sub-millisecond scale; take the best of
    # several runs, as timeit does
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def test_c01_classical_bound():
    g = standard_game()
    joint, _ = max_weighted_classical(g, 1, 1)
    alice_only, pair = max_weighted_classical(g, 1, 0)
    elapsed = best_time(lambda: (max_weighted_classical(g, 1, 1),
                                 max_weighted_classical(g, 1, 0)))
    ua, ub = payoff_matrices(g)
    partner = Fraction(ub[pair]).limit_denominator(16)
    ok = (joint == Fraction(9, 8)
          and alice_only == Fraction(3, 4)
          and partner == Fraction(3, 8)
          and elapsed < 1e-3)
    record("C1 classical joint bound 9/8, solo max 3/4 with partner 3/8", ok,
           f"joint={joint}, solo={alice_only}, partner={partner}, {elapsed * 1e6:.0f} us")


def test_c02_three_equilibria():
    g = standard_game()
    ua, ub = payoff_matrices(g)
    eqs = nash_equilibria(g)
    elapsed = best_time(lambda: nash_equilibria(g), repeats=3)
    want = {
        (Fraction(9, 16), Fraction(9, 16)),
        (Fraction(11, 16), Fraction(7, 16)),
        (Fraction(7, 16), Fraction(11, 16)),
    }
    found = set()
    extras = 0
    all_verify = True
    for eq in eqs:
        p, q = np.asarray(eq.mix_a), np.asarray(eq.mix_b)
        all_verify &= verify_nash(ua, ub, p, q, tol=1e-9)
        key = (Fraction(eq.payoffs.alice).limit_denominator(10 ** 6),
               Fraction(eq.payoffs.bob).limit_denominator(10 ** 6))
        if key in want:
            found.add(key)
        else:
            extras += 1
    ok = found == want and all_verify and elapsed < 10e-3
    flag = f", {extras} extra mixed equilibria flagged" if extras else ""
    record("C2 coordination equilibria (9/16,9/16), (11/16,7/16), (7/16,11/16)", ok,
           f"{len(eqs)} found, all verify at 1e-9{flag}, {elapsed * 1e3:.1f} ms")


def test_c03_fair_quantum_equilibrium():
    g = standard_game()
    s = optimal_strategy()
    pay = expected_payoffs(g, behavior_of_quantum(s))
    rep = verify_quantum_equilibrium(g, s, tol=1e-8)
    elapsed = best_time(lambda: verify_quantum_equilibrium(
        g, optimal_strategy(), tol=1e-8), repeats=3)
    ok = (abs(pay.alice - FAIR_PAYOFF) < 1e-9
          and abs(pay.bob - FAIR_PAYOFF) < 1e-9
          and abs(pay.alice + pay.bob - JOINT_MAX) < 1e-9
          and rep.is_equilibrium
          and elapsed < 10e-3)
    record("C3 fair quantum equilibrium at 0.640165 each, joint 1.280330", ok,
           f"payoffs=({pay.alice:.9f}, {pay.bob:.9f}), gain={rep.max_gain:.1e}, {elapsed * 1e3:.1f} ms")


def test_c04_bell_state_covariance():
    g = standard_game()

    def all_four():
        return [verify_quantum_equilibrium(g, rotated_strategy(k), tol=1e-8).max_gain
                for k in range(4)]

    gains = all_four()
    elapsed = best_time(all_four, repeats=3)
    ok = all(gain <= 1e-8 for gain in gains) and elapsed < 50e-3
    record("C4 equilibrium holds on all four maximally entangled states", ok,
           f"max gain {max(gains):.1e}, {elapsed * 1e3:.1f} ms")


def test_c05_relaxation_bounds_and_sandwich():
    g = standard_game()
    t0 = time.perf_counter()
    st = build_moment_structure("1+ab")
    chsh = solve_sdp(st, chsh_functional()).value
    joint = npa_upper_bound(g, 1.0, 1.0, level="1+ab")
    grid = default_weight_grid(33)
    samples = quantum_region_sample(g, grid, restarts=20, seed=0)
    bounds = region_upper_boundary(g, grid, level="1+ab")
    sandwich = True
    for (w_a, w_b), s, b in zip(grid, samples, bounds):
        classical = float(max_weighted_classical(g, w_a, w_b)[0])
        sandwich &= classical <= s.objective + 1e-9
        sandwich &= s.objective <= b.bound + 1e-6
    elapsed = time.perf_counter() - t0
    ok = (abs(chsh - 2.8284) < 1e-3
          and abs(joint - 1.2803) < 1e-3
          and sandwich
          and elapsed < 5.0)
    record("C5 moment relaxation: CHSH 2.8284, joint 1.2803, classical<=seesaw<=bound on 33 directions",
           ok, f"chsh={chsh:.6f}, joint={joint:.6f}, sandwich={sandwich}, {elapsed:.2f} s")


def test_c06_seesaw_attainment():
    g = standard_game()
    t0 = time.perf_counter()
    res = seesaw_best_of(g, 1.0, 1.0, restarts=20, seed=0)
    elapsed = time.perf_counter() - t0
    ok = res.objective >= 1.2803 - 1e-4 and elapsed < 2.0
    record("C6 see-saw over 20 restarts reaches the joint quantum maximum", ok,
           f"objective={res.objective:.8f}, {elapsed:.2f} s")


def test_c07_experiment_crossing():
    g = standard_game()
    t0 = time.perf_counter()
    model = SourceModel(noise="werner", visibility=0.9)
    tally = simulate_runs(model, 1_000_000, seed=7)
    est = estimated_payoffs(tally, g)
    joint = est.payoffs.alice + est.payoffs.bob
    se = float(np.hypot(*est.half_widths)) / 1.96
    closed_form = 2 * expected_payoffs(g, model.behavior()).alice
    within = abs(joint - closed_form) <= 4 * se
    above = (joint - 1.125) / se >= 5.0

    v = visibility_from_chsh(2.645, "werner")
    tuned = simulate_runs(SourceModel(noise="werner", visibility=v), 1_000_000, seed=8)
    est2 = estimated_payoffs(tuned, g)
    joint2 = est2.payoffs.alice + est2.payoffs.bob
    in_window = 1.22 <= joint2 <= 1.27
    elapsed = time.perf_counter() - t0
    ok = within and above and in_window and elapsed < 5.0
    record("C7 simulated runs cross the classical bound and match the closed form", ok,
           f"joint={joint:.6f} vs {closed_form:.6f} ({abs(joint - closed_form) / se:.1f} se), "
           f"margin {(joint - 1.125) / se:.0f} se, tuned joint={joint2:.4f}, {elapsed:.2f} s")


def test_c08_debias():
    g = standard_game()
    t0 = time.perf_counter()
    raw_ok = True
    for seed, v in ((1, 0.85), (2, 0.9), (3, 0.95)):
        tally = simulate_runs(SourceModel(visibility=v), 200_000, seed=seed)
        est = estimated_payoffs(tally, g)
        raw_ok &= abs(est.payoffs.alice - est.payoffs.bob) <= sum(est.half_widths)
        sym = expected_payoffs(g, symmetrize(estimate_behavior(tally).behavior))
        raw_ok &= abs(sym.alice - sym.bob) <= 1e-12
    # analytic half-and-equalize on arbitrary behaviors
    rng = np.random.default_rng(44)
    analytic_ok = True
    for _ in range(100):
        p = rng.random((2, 2, 2, 2))
        p /= p.sum(axis=(2, 3), keepdims=True)
        b = Behavior(p)
        orig = expected_payoffs(g, b)
        sym = expected_payoffs(g, symmetrize(b))
        analytic_ok &= abs(sym.alice - sym.bob) <= 1e-10
        analytic_ok &= abs(sym.alice - 0.5 * (orig.alice + orig.bob)) <= 1e-10
    elapsed = time.perf_counter() - t0
    ok = raw_ok and analytic_ok and elapsed < 1.0
    record("C8 debias: estimates agree within error bars, symmetrization equalizes exactly", ok,
           f"{elapsed:.2f} s")


def test_c09_property_suites():
    g = standard_game()
    t0 = time.perf_counter()

    rng = np.random.default_rng(90)
    born_ok = True
    for _ in range(1000):
        beh = behavior_of_quantum(random_strategy(rng))
        born_ok &= bool(np.all(beh.p >= -1e-12))
        born_ok &= bool(np.allclose(beh.p.sum(axis=(2, 3)), 1.0, atol=1e-9))
        born_ok &= check_no_signaling(beh, tol=1e-9).is_no_signaling

    thetas = np.linspace(0.0, np.pi, 100)
    phis = np.linspace(0.0, 2 * np.pi, 100, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    grid = np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)],
                    axis=-1).reshape(-1, 3)
    sigma = np.stack([PAULI_X, PAULI_Y, PAULI_Z])
    dominance_ok = True
    for _ in range(200):
        s = random_strategy(rng)
        for player in (0, 1):
            report = best_response(g, s, player)
            grid_total = 0.0
            for own_type in (0, 1):
                g0, g1 = effective_payoff_operators(g, s, player, own_type)
                d = g0 - g1
                dvec = np.einsum("kij,ji->k", sigma, d).real
                grid_total += (np.trace(g1).real + 0.5 * np.trace(d).real
                               + 0.5 * grid @ dvec).max()
            dominance_ok &= report.optimal_value + 1e-9 >= grid_total

    monotone_ok = True
    for seed in range(30):
        init = random_strategy(np.random.default_rng(seed))
        res = seesaw(g, 1.0, 1.0, init)
        monotone_ok &= bool(np.all(np.diff(res.trace) >= -1e-10))

    elapsed = time.perf_counter() - t0
    ok = born_ok and dominance_ok and monotone_ok and elapsed < 30.0
    record("C9 property sweeps: Born behaviors no-signaling, best response dominates grid, see-saw monotone",
           ok, f"{elapsed:.2f} s")


def test_c10_nosignaling_reference():
    g = standard_game()
    pay = expected_payoffs(g, pr_box_behavior())
    elapsed = best_time(lambda: expected_payoffs(g, pr_box_behavior()))
    ok = pay.alice == 0.75 and pay.bob == 0.75 and elapsed < 1e-3
    record("C10 extremal no-signaling box pays (3/4, 3/4) exactly", ok,
           f"({pay.alice}, {pay.bob}), {elapsed * 1e6:.0f} us")
