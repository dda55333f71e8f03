"""Two-player Bayesian game with conflicting interests: classical equilibria,
quantum strategies, moment-relaxation bounds and a photon-pair simulation."""

from .game import (
    Behavior,
    GameSpec,
    NoSignalingReport,
    PayoffPoint,
    ValidationError,
    check_no_signaling,
    expected_payoffs,
    load_behavior,
    load_game,
    pr_box_behavior,
    save_behavior,
    save_game,
    standard_game,
    symmetrize,
)
from .classical import (
    CorrelatedStrategy,
    NashEquilibrium,
    behavior_of_correlated,
    behavior_of_deterministic,
    classical_region,
    deterministic_payoff_points,
    is_correlated_equilibrium,
    max_weighted_classical,
    nash_equilibria,
    payoff_matrices,
    verify_nash,
)
from .quantum import (
    QuantumState,
    QuantumStrategy,
    QubitMeasurement,
    behavior_of_quantum,
    bell_state,
    chsh_value,
    chsh_win_probability,
    colored_noise_state,
    fidelity,
    load_strategy,
    measurement_from_angle,
    measurement_from_bloch,
    optimal_strategy,
    phi_plus,
    pure_state,
    rotated_strategy,
    save_strategy,
    werner_state,
)
from .equilibrium import (
    BestResponseReport,
    SeesawResult,
    VerificationReport,
    best_response,
    default_weight_grid,
    quantum_region_sample,
    seesaw,
    seesaw_best_of,
    verify_quantum_equilibrium,
)
from .npa import (
    BellFunctional,
    MomentStructure,
    SdpError,
    SdpSolution,
    build_moment_structure,
    chsh_functional,
    npa_upper_bound,
    payoff_functional,
    region_upper_boundary,
    solve_sdp,
)
from .experiment import (
    BehaviorEstimate,
    PayoffEstimate,
    SourceModel,
    TallyTable,
    accidental_correction,
    estimate_behavior,
    estimated_payoffs,
    read_tally_csv,
    simulate_runs,
    visibility_from_chsh,
    visibility_from_fidelity,
    write_tally_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "BehaviorEstimate",
    "BellFunctional",
    "BestResponseReport",
    "CorrelatedStrategy",
    "GameSpec",
    "MomentStructure",
    "NashEquilibrium",
    "NoSignalingReport",
    "PayoffEstimate",
    "PayoffPoint",
    "QuantumState",
    "QuantumStrategy",
    "QubitMeasurement",
    "SdpError",
    "SdpSolution",
    "SeesawResult",
    "SourceModel",
    "TallyTable",
    "ValidationError",
    "VerificationReport",
    "accidental_correction",
    "behavior_of_correlated",
    "behavior_of_deterministic",
    "behavior_of_quantum",
    "bell_state",
    "best_response",
    "build_moment_structure",
    "check_no_signaling",
    "chsh_functional",
    "chsh_value",
    "chsh_win_probability",
    "classical_region",
    "colored_noise_state",
    "default_weight_grid",
    "deterministic_payoff_points",
    "estimate_behavior",
    "estimated_payoffs",
    "expected_payoffs",
    "fidelity",
    "is_correlated_equilibrium",
    "load_behavior",
    "load_game",
    "load_strategy",
    "max_weighted_classical",
    "measurement_from_angle",
    "measurement_from_bloch",
    "nash_equilibria",
    "npa_upper_bound",
    "optimal_strategy",
    "payoff_functional",
    "payoff_matrices",
    "phi_plus",
    "pr_box_behavior",
    "pure_state",
    "quantum_region_sample",
    "read_tally_csv",
    "region_upper_boundary",
    "rotated_strategy",
    "save_behavior",
    "save_game",
    "save_strategy",
    "seesaw",
    "seesaw_best_of",
    "simulate_runs",
    "solve_sdp",
    "standard_game",
    "symmetrize",
    "verify_nash",
    "verify_quantum_equilibrium",
    "visibility_from_chsh",
    "visibility_from_fidelity",
    "werner_state",
    "write_tally_csv",
]
