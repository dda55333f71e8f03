"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 invalid input file or value,
4 solver failure.  Every subcommand accepts --json for machine-readable
output on stdout; the emitted documents validate against JSON_SCHEMAS.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import classical, equilibrium, experiment, npa
from .game import GameSpec, ValidationError, expected_payoffs, load_game, standard_game, symmetrize
from .npa import SdpError
from .quantum import (
    QuantumStrategy,
    behavior_of_quantum,
    chsh_value,
    chsh_win_probability,
    load_strategy,
    optimal_strategy,
    save_strategy,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_SOLVER = 4

_NUMBER = {"type": "number"}
_POINT = {
    "type": "object",
    "properties": {"alice": _NUMBER, "bob": _NUMBER},
    "required": ["alice", "bob"],
}

JSON_SCHEMAS = {
    "classical": {
        "type": "object",
        "properties": {
            "deterministic_points": {"type": "array", "items": _POINT},
            "region_vertices": {"type": "array", "items": _POINT},
            "nash_equilibria": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "mix_a": {"type": "array", "items": _NUMBER},
                        "mix_b": {"type": "array", "items": _NUMBER},
                        "payoffs": _POINT,
                        "component": {"type": "boolean"},
                    },
                    "required": ["mix_a", "mix_b", "payoffs", "component"],
                },
            },
            "extra_equilibria_flag": {"type": "boolean"},
            "max_joint": {
                "type": "object",
                "properties": {
                    "value": _NUMBER,
                    "value_exact": {"type": "string"},
                    "strategies": {"type": "array", "items": {"type": "integer"}},
                },
                "required": ["value", "value_exact", "strategies"],
            },
        },
        "required": ["deterministic_points", "region_vertices", "nash_equilibria", "max_joint"],
    },
    "quantum": {
        "type": "object",
        "properties": {
            "payoffs": _POINT,
            "chsh": _NUMBER,
            "win_probability": _NUMBER,
            "is_equilibrium": {"type": "boolean"},
            "max_gain": _NUMBER,
        },
        "required": ["payoffs", "chsh", "win_probability", "is_equilibrium", "max_gain"],
    },
    "verify-eq": {
        "type": "object",
        "properties": {"is_equilibrium": {"type": "boolean"}, "max_gain": _NUMBER, "tol": _NUMBER},
        "required": ["is_equilibrium", "max_gain", "tol"],
    },
    "seesaw": {
        "type": "object",
        "properties": {
            "w_a": _NUMBER,
            "w_b": _NUMBER,
            "objective": _NUMBER,
            "payoffs": _POINT,
            "converged": {"type": "boolean"},
            "iterations": {"type": "integer"},
            "restarts": {"type": "integer"},
        },
        "required": ["w_a", "w_b", "objective", "payoffs", "converged"],
    },
    "npa-bound": {
        "type": "object",
        "properties": {
            "w_a": _NUMBER,
            "w_b": _NUMBER,
            "level": {"type": "string"},
            "bound": _NUMBER,
            "gap": _NUMBER,
            "iterations": {"type": "integer"},
            "chsh_bound": _NUMBER,
        },
        "required": ["level", "bound", "gap"],
    },
    "region": {
        "type": "object",
        "properties": {
            "out_dir": {"type": "string"},
            "files": {"type": "array", "items": {"type": "string"}},
            "classical_vertices": {"type": "array", "items": _POINT},
            "samples": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "w_a": _NUMBER, "w_b": _NUMBER,
                        "payoffs": _POINT,
                        "objective": _NUMBER,
                        "converged": {"type": "boolean"},
                    },
                    "required": ["w_a", "w_b", "payoffs", "objective", "converged"],
                },
            },
            "bounds": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "w_a": _NUMBER, "w_b": _NUMBER, "bound": _NUMBER,
                        "gap": _NUMBER, "level": {"type": "string"},
                    },
                    "required": ["w_a", "w_b", "bound", "gap", "level"],
                },
            },
        },
        "required": ["classical_vertices", "samples", "bounds"],
    },
    "experiment": {
        "type": "object",
        "properties": {
            "noise": {"type": "string"},
            "visibility": _NUMBER,
            "accidental_rate": _NUMBER,
            "runs": {"type": "integer"},
            "seed": {"type": "integer"},
            "corrected": {"type": "boolean"},
            "payoffs": _POINT,
            "half_widths": {"type": "array", "items": _NUMBER},
            "joint": _NUMBER,
            "joint_half_width": _NUMBER,
            "symmetrized_payoffs": _POINT,
            "chsh": _NUMBER,
            "win_probability": _NUMBER,
            "analytic_payoffs": _POINT,
            "low_count_settings": {"type": "array"},
        },
        "required": ["noise", "visibility", "runs", "seed", "payoffs", "half_widths",
                     "joint", "joint_half_width", "chsh", "win_probability"],
    },
}


def _point_doc(point) -> dict:
    return {"alice": point.alice, "bob": point.bob}


def _load_game_arg(path: str | None) -> GameSpec:
    return standard_game() if path is None else load_game(path)


def _load_strategy_arg(path: str | None) -> QuantumStrategy:
    return optimal_strategy() if path is None else load_strategy(path)


def _emit(doc: dict, as_json: bool, human: str) -> None:
    if as_json:
        print(json.dumps(doc, indent=1, sort_keys=True))
    else:
        print(human)


# --- subcommands ------------------------------------------------------------

def cmd_classical(args) -> int:
    game = _load_game_arg(args.game)
    points = classical.deterministic_payoff_points(game)
    vertices = classical.classical_region(game)
    equilibria = classical.nash_equilibria(game)
    value, pair = classical.max_weighted_classical(game, 1, 1)
    doc = {
        "deterministic_points": [_point_doc(p) for p in points],
        "region_vertices": [_point_doc(p) for p in vertices],
        "nash_equilibria": [
            {
                "mix_a": [float(x) for x in eq.mix_a],
                "mix_b": [float(x) for x in eq.mix_b],
                "payoffs": _point_doc(eq.payoffs),
                "component": eq.component,
            }
            for eq in equilibria
        ],
        "extra_equilibria_flag": len(equilibria) != 3,
        "max_joint": {"value": float(value), "value_exact": str(value), "strategies": list(pair)},
    }
    if args.region_csv:
        write_region_csv(vertices, args.region_csv)
        doc["region_csv"] = args.region_csv
    lines = [
        f"deterministic payoff points: {len(points)}",
        "region vertices: " + ", ".join(f"({v.alice:.4f}, {v.bob:.4f})" for v in vertices),
        f"max joint payoff: {float(value):.6f} (= {value}) at strategies "
        f"({classical.STRATEGY_LABELS[pair[0]]!r}, {classical.STRATEGY_LABELS[pair[1]]!r})",
        f"equilibria found: {len(equilibria)}"
        + ("" if len(equilibria) == 3 else "  [flag: expected 3]"),
    ]
    for eq in equilibria:
        lines.append(f"  payoffs ({eq.payoffs.alice:.6f}, {eq.payoffs.bob:.6f})"
                     + ("  [component]" if eq.component else ""))
    _emit(doc, args.json, "\n".join(lines))
    return EXIT_OK


def write_region_csv(vertices, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["F_A", "F_B"])
        for v in vertices:
            writer.writerow([repr(v.alice), repr(v.bob)])


def cmd_quantum(args) -> int:
    game = _load_game_arg(args.game)
    strategy = _load_strategy_arg(args.strategy)
    behavior = behavior_of_quantum(strategy)
    payoffs = expected_payoffs(game, behavior)
    report = equilibrium.verify_quantum_equilibrium(game, strategy, tol=args.tol)
    if args.save_strategy:
        save_strategy(strategy, args.save_strategy)
    doc = {
        "payoffs": _point_doc(payoffs),
        "chsh": chsh_value(behavior),
        "win_probability": chsh_win_probability(behavior),
        "is_equilibrium": report.is_equilibrium,
        "max_gain": report.max_gain,
    }
    human = (
        f"payoffs: ({payoffs.alice:.6f}, {payoffs.bob:.6f})   joint {payoffs.alice + payoffs.bob:.6f}\n"
        f"CHSH: {doc['chsh']:.6f}   win probability: {doc['win_probability']:.6f}\n"
        f"equilibrium: {report.is_equilibrium} (max best-response gain {report.max_gain:.3e})"
    )
    _emit(doc, args.json, human)
    return EXIT_OK


def cmd_verify_eq(args) -> int:
    game = _load_game_arg(args.game)
    strategy = _load_strategy_arg(args.strategy)
    report = equilibrium.verify_quantum_equilibrium(game, strategy, tol=args.tol)
    doc = {"is_equilibrium": report.is_equilibrium, "max_gain": report.max_gain, "tol": args.tol}
    _emit(doc, args.json,
          f"equilibrium: {report.is_equilibrium} (max gain {report.max_gain:.3e}, tol {args.tol:g})")
    return EXIT_OK


def cmd_seesaw(args) -> int:
    game = _load_game_arg(args.game)
    result = equilibrium.seesaw_best_of(
        game, args.wa, args.wb, restarts=args.restarts, seed=args.seed, max_iters=args.max_iters,
    )
    doc = {
        "w_a": args.wa, "w_b": args.wb,
        "objective": result.objective,
        "payoffs": _point_doc(result.payoffs),
        "converged": result.converged,
        "iterations": result.iterations,
        "restarts": args.restarts,
    }
    human = (
        f"weights ({args.wa:g}, {args.wb:g}): objective {result.objective:.8f}\n"
        f"payoffs ({result.payoffs.alice:.8f}, {result.payoffs.bob:.8f})  converged={result.converged}"
    )
    _emit(doc, args.json, human)
    return EXIT_OK


def cmd_npa_bound(args) -> int:
    game = _load_game_arg(args.game)
    structure = npa.build_moment_structure(args.level)
    functional = npa.chsh_functional() if args.chsh else npa.payoff_functional(game, args.wa, args.wb)
    solution = npa.solve_sdp(structure, functional, tol=args.tol, max_iters=args.max_iters)
    doc = {
        "w_a": args.wa, "w_b": args.wb,
        "level": structure.level,
        "bound": solution.value,
        "gap": solution.gap,
        "iterations": solution.iterations,
    }
    label = "CHSH" if args.chsh else f"weights ({args.wa:g}, {args.wb:g})"
    if args.chsh:
        doc["chsh_bound"] = solution.value
    _emit(doc, args.json,
          f"{label} level {structure.level}: bound {solution.value:.8f} (gap {solution.gap:.2e}, "
          f"{solution.iterations} iterations)")
    return EXIT_OK


def cmd_region(args) -> int:
    game = _load_game_arg(args.game)
    grid = equilibrium.default_weight_grid(args.grid)
    vertices = classical.classical_region(game)
    samples = equilibrium.quantum_region_sample(game, grid, restarts=args.restarts, seed=args.seed)
    bounds = npa.region_upper_boundary(game, grid, level=args.level)
    files = []
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        region_path = os.path.join(args.out, "classical_region.csv")
        write_region_csv(vertices, region_path)
        samples_path = os.path.join(args.out, "quantum_samples.csv")
        with open(samples_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["wA", "wB", "FA", "FB", "objective", "converged"])
            for s in samples:
                writer.writerow([repr(s.w_a), repr(s.w_b), repr(s.payoffs.alice),
                                 repr(s.payoffs.bob), repr(s.objective), s.converged])
        bounds_path = os.path.join(args.out, "npa_boundary.csv")
        with open(bounds_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["wA", "wB", "bound", "level", "gap"])
            for bp in bounds:
                writer.writerow([repr(bp.w_a), repr(bp.w_b), repr(bp.bound), bp.level, repr(bp.gap)])
        markers_path = os.path.join(args.out, "markers.csv")
        with open(markers_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "F_A", "F_B"])
            for eq in classical.nash_equilibria(game):
                writer.writerow(["classical_equilibrium", repr(eq.payoffs.alice), repr(eq.payoffs.bob)])
            fair = expected_payoffs(game, behavior_of_quantum(optimal_strategy()))
            writer.writerow(["quantum_fair_equilibrium", repr(fair.alice), repr(fair.bob)])
        files = [region_path, samples_path, bounds_path, markers_path]
    doc = {
        "classical_vertices": [_point_doc(v) for v in vertices],
        "samples": [
            {"w_a": s.w_a, "w_b": s.w_b, "payoffs": _point_doc(s.payoffs),
             "objective": s.objective, "converged": s.converged}
            for s in samples
        ],
        "bounds": [
            {"w_a": bp.w_a, "w_b": bp.w_b, "bound": bp.bound, "gap": bp.gap, "level": bp.level}
            for bp in bounds
        ],
    }
    if args.out:
        doc["out_dir"] = args.out
        doc["files"] = files
    best = max(samples, key=lambda s: s.payoffs.alice + s.payoffs.bob)
    human_lines = [
        f"grid: {len(grid)} directions, {len(samples)} see-saw samples, {len(bounds)} bounds",
        f"best joint see-saw payoff: {best.payoffs.alice + best.payoffs.bob:.6f}",
    ]
    if files:
        human_lines.append("wrote: " + ", ".join(files))
    _emit(doc, args.json, "\n".join(human_lines))
    return EXIT_OK


def cmd_experiment(args) -> int:
    game = _load_game_arg(args.game)
    if args.noise == "custom" and not args.state:
        raise ValidationError("--noise custom requires --state FILE")
    if args.fidelity is not None:
        visibility = experiment.visibility_from_fidelity(args.fidelity, args.noise)
    else:
        visibility = args.visibility if args.visibility is not None else 1.0
    custom_state = None
    if args.noise == "custom":
        from .quantum import QuantumState
        with open(args.state) as fh:
            try:
                doc_state = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"malformed state file: {exc}") from exc
        arr = np.array(doc_state.get("state", doc_state.get("rho")), dtype=float)
        if arr.shape != (4, 4, 2):
            raise ValidationError("custom state file must hold a 4x4 complex matrix as [re, im] pairs")
        custom_state = QuantumState(arr[..., 0] + 1j * arr[..., 1])
    model = experiment.SourceModel(
        noise=args.noise,
        visibility=visibility,
        accidental_rate=args.accidentals,
        custom_state=custom_state,
    )
    tally = experiment.simulate_runs(model, args.runs, args.seed)
    if args.tally_csv:
        experiment.write_tally_csv(tally, args.tally_csv)
    corrected = args.accidentals > 0 and not args.no_correct
    table = experiment.accidental_correction(tally, args.accidentals) if corrected else tally
    est = experiment.estimated_payoffs(table, game)
    beh_est = experiment.estimate_behavior(table)
    sym_payoffs = expected_payoffs(game, symmetrize(beh_est.behavior))
    analytic = expected_payoffs(game, model.behavior())
    joint_hw = float(np.hypot(*est.half_widths))
    doc = {
        "noise": args.noise,
        "visibility": float(visibility),
        "accidental_rate": args.accidentals,
        "runs": args.runs,
        "seed": args.seed,
        "corrected": corrected,
        "payoffs": _point_doc(est.payoffs),
        "half_widths": [est.half_widths[0], est.half_widths[1]],
        "joint": est.payoffs.alice + est.payoffs.bob,
        "joint_half_width": joint_hw,
        "symmetrized_payoffs": _point_doc(sym_payoffs),
        "chsh": chsh_value(beh_est.behavior),
        "win_probability": chsh_win_probability(beh_est.behavior),
        "analytic_payoffs": _point_doc(analytic),
        "low_count_settings": [list(s) for s in beh_est.low_count_settings],
    }
    human = (
        f"{args.noise} source, visibility {visibility:.6f}, {args.runs} runs, seed {args.seed}\n"
        f"payoffs: ({est.payoffs.alice:.6f} +- {est.half_widths[0]:.6f}, "
        f"{est.payoffs.bob:.6f} +- {est.half_widths[1]:.6f})\n"
        f"joint: {doc['joint']:.6f} +- {joint_hw:.6f}   (analytic {analytic.alice + analytic.bob:.6f})\n"
        f"CHSH: {doc['chsh']:.6f}   win probability: {doc['win_probability']:.6f}"
    )
    if beh_est.low_count_settings:
        human += f"\nlow-count settings: {list(beh_est.low_count_settings)}"
    _emit(doc, args.json, human)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conflictgame",
        description="Analyze the built-in conflicting-interest game: classical and quantum "
                    "equilibria, moment-relaxation bounds, and simulated photon-pair runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_game(p):
        p.add_argument("--game", metavar="FILE", help="game JSON file (default: built-in game)")
        p.add_argument("--json", action="store_true", help="emit JSON on stdout")

    p = sub.add_parser("classical", help="deterministic points, region, Nash equilibria")
    add_game(p)
    p.add_argument("--region-csv", metavar="PATH", help="write region vertices as CSV")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("quantum", help="payoffs and equilibrium check of a strategy")
    add_game(p)
    p.add_argument("--strategy", metavar="FILE", help="strategy JSON (default: built-in optimal)")
    p.add_argument("--save-strategy", metavar="PATH", help="write the strategy back as JSON")
    p.add_argument("--tol", type=float, default=1e-8, help="equilibrium gain tolerance")
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("verify-eq", help="best-response equilibrium check")
    add_game(p)
    p.add_argument("--strategy", metavar="FILE", help="strategy JSON (default: built-in optimal)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_verify_eq)

    p = sub.add_parser("seesaw", help="alternating best responses on a weighted objective")
    add_game(p)
    p.add_argument("--wa", type=float, default=1.0)
    p.add_argument("--wb", type=float, default=1.0)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=500)
    p.set_defaults(func=cmd_seesaw)

    p = sub.add_parser("npa-bound", help="moment-relaxation upper bound")
    add_game(p)
    p.add_argument("--wa", type=float, default=1.0)
    p.add_argument("--wb", type=float, default=1.0)
    p.add_argument("--level", default="1+ab", help="1, 1+ab or 2")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--chsh", action="store_true", help="bound the CHSH functional instead")
    p.set_defaults(func=cmd_npa_bound)

    p = sub.add_parser("region", help="classical hull, see-saw samples and bounds")
    add_game(p)
    p.add_argument("--grid", type=int, default=33)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", default="1+ab")
    p.add_argument("--out", metavar="DIR", help="write the CSV bundle into this directory")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("experiment", help="simulate photon-pair runs and estimate payoffs")
    add_game(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--visibility", type=float, help="noise visibility in [0, 1]")
    group.add_argument("--fidelity", type=float, help="target-state fidelity (converted per model)")
    p.add_argument("--noise", choices=list(experiment.NOISE_KINDS), default="werner")
    p.add_argument("--state", metavar="FILE", help="custom state JSON (with --noise custom)")
    p.add_argument("--accidentals", type=float, default=0.0, help="accidental rate in [0, 1)")
    p.add_argument("--runs", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-correct", action="store_true", help="skip accidental correction")
    p.add_argument("--tally-csv", metavar="PATH", help="write raw tallies as CSV")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment" and args.runs < 1:
        parser.error("--runs must be a positive integer")
    if args.command == "region" and args.grid < 2:
        parser.error("--grid must be at least 2")
    if args.command == "seesaw" and args.restarts < 1:
        parser.error("--restarts must be at least 1")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SdpError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
