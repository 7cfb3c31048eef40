import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .experiments import (
    ADVERSARIES,
    ALGORITHMS,
    DEFAULT_ARTIFACT_DIRECTORY,
    DEFAULT_OUTPUT_PATH,
    GENERATORS,
    ExperimentSpec,
    generate_game,
    resolve_algorithm,
    run_adversary,
    run_algorithm,
    run_experiment,
    summarize,
    verify_claim,
)
from .games import (
    exact_regret,
    is_eps_ne,
    is_eps_wsne,
    load_game,
    load_profile,
    save_game,
    save_profile,
)
from .lower_bounds import gk_sample
from .oracle import MatrixOracle, PayoffOracle, RunFailure, budgeted
from .zerosum import DEFAULT_ROUNDS_CONSTANT

LOGGER = logging.getLogger(__name__)

DEFAULT_PROFILE_OUTPUT_PATH = Path("results/profile.txt")
DEFAULT_GAME_OUTPUT_PATH = Path("results/game.txt")


def _add_common_run_arguments(parser: argparse.ArgumentParser, *, default_k: Optional[int]) -> None:
    parser.add_argument("--k", type=int, default=default_k, help="Strategies per player.")
    parser.add_argument("--eps", type=float, default=0.1, help="Target accuracy (default: 0.1).")
    parser.add_argument("--seed", type=int, default=0, help="Root seed (default: 0).")
    parser.add_argument(
        "--budget",
        type=int,
        default=None,
        help="Hard query budget; queries beyond it are refused.",
    )
    parser.add_argument(
        "--rounds-constant",
        type=float,
        default=DEFAULT_ROUNDS_CONSTANT,
        help="Constant c0 in rounds = ceil(c0 * ln k / eps^2) (default: 16).",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Run payoff-query equilibrium algorithms, adversaries and experiments"
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: WARNING).",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Run one algorithm on one game.")
    _add_common_run_arguments(solve, default_k=None)
    solve.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    solve.add_argument(
        "--generator",
        default="uniform",
        help=f"Game generator ({', '.join(GENERATORS)}) or a game file path.",
    )
    solve.add_argument(
        "--out",
        type=Path,
        default=DEFAULT_PROFILE_OUTPUT_PATH,
        help="Target profile file (default: results/profile.txt).",
    )
    solve.add_argument("--ledger-out", type=Path, default=None, help="Export the query ledger as CSV.")

    bench = commands.add_parser("bench", help="Run seeded Monte-Carlo trials and write a CSV.")
    _add_common_run_arguments(bench, default_k=None)
    bench.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    bench.add_argument("--trials", type=int, default=1, help="Number of trials (default: 1).")
    bench.add_argument(
        "--generator",
        default="uniform",
        help=f"Game generator ({', '.join(GENERATORS)}) or a game file path.",
    )
    bench.add_argument(
        "--out",
        type=Path,
        default=DEFAULT_OUTPUT_PATH,
        help="Target CSV path (default: results/trials.csv).",
    )
    bench.add_argument("--workers", type=int, default=1, help="Worker processes (default: 1).")
    bench.add_argument(
        "--timing",
        action="store_true",
        help="Record wall time per trial; without it wall_time_ms is 0 and the CSV is reproducible.",
    )

    adversary = commands.add_parser("adversary", help="Run an algorithm against a lower-bound adversary.")
    _add_common_run_arguments(adversary, default_k=64)
    adversary.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    adversary.add_argument("--adversary", required=True, choices=ADVERSARIES)
    adversary.add_argument(
        "--out",
        type=Path,
        default=DEFAULT_ARTIFACT_DIRECTORY,
        help="Directory for the refutation artifact (default: results/adversary).",
    )

    verify = commands.add_parser("verify", help="Exact regrets of a profile in a game.")
    verify.add_argument("--game", type=Path, required=True, help="Game file.")
    verify.add_argument("--profile", type=Path, required=True, help="Profile file.")
    verify.add_argument("--eps", type=float, default=None, help="Also report eps-NE and eps-WSNE verdicts.")

    generate = commands.add_parser("generate", help="Write a generated game file.")
    generate.add_argument("--generator", default="uniform", choices=GENERATORS)
    generate.add_argument("--k", type=int, required=True)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument(
        "--out",
        type=Path,
        default=DEFAULT_GAME_OUTPUT_PATH,
        help="Target game file (default: results/game.txt).",
    )
    return parser


def _solve(args: argparse.Namespace) -> int:
    algorithm = resolve_algorithm(args.algo)
    algorithm.check_eps(args.eps)
    if args.generator in GENERATORS:
        if args.k is None:
            raise ValueError("--k is required with a generator")
        if args.generator not in algorithm.generators:
            raise ValueError(f"algorithm {algorithm.name!r} does not accept generator {args.generator!r}")
        game = generate_game(args.generator, args.k, args.seed)
    else:
        game = load_game(Path(args.generator))
        if args.k is not None and args.k != game.k:
            raise ValueError(f"--k {args.k} does not match the {game.k}x{game.k} game file")

    matrix_oracle = MatrixOracle(game, keep_log=args.ledger_out is not None)
    oracle: PayoffOracle = matrix_oracle
    if args.budget is not None:
        oracle = budgeted(oracle, args.budget)

    profile, branch, completed = run_algorithm(
        algorithm, oracle, game.k, args.eps, args.seed, args.rounds_constant
    )
    check = verify_claim(algorithm, game, profile, args.eps)
    report = check.report

    save_profile(profile, args.out)
    print("Profile written:", f"{algorithm.name} ({branch}) -> {args.out}")
    print(
        "Queries:",
        f"{matrix_oracle.ledger.total_count} total, {matrix_oracle.ledger.answered_count} distinct cells",
    )
    print(
        "Exact check:",
        f"max regret {report.max_regret:.6g}, WSNE violation {report.max_wsne_violation:.6g}, "
        f"{algorithm.claim} at {check.level:.6g}: {'ok' if check.verified else 'FAILED'}",
    )
    if args.ledger_out is not None:
        rows = matrix_oracle.ledger.export_csv(args.ledger_out)
        print("Query ledger exported:", f"{rows} rows -> {args.ledger_out}")
    return 0 if completed else 1


def _bench(args: argparse.Namespace) -> int:
    spec = ExperimentSpec(
        algorithm=args.algo,
        k=args.k,
        eps=args.eps,
        trials=args.trials,
        seed=args.seed,
        budget=args.budget,
        generator=args.generator,
        output=args.out,
        rounds_constant=args.rounds_constant,
        workers=args.workers,
        timing=args.timing,
    )
    records = run_experiment(spec)
    summary = summarize(records)
    print(
        "Experiment finished:",
        f"{len(records)} trials, success rate {summary['success_rate']:.3f}, "
        f"mean queries {summary['mean_queries']:.1f} -> {args.out}",
    )
    return 0


def _adversary(args: argparse.Namespace) -> int:
    report = run_adversary(
        args.adversary,
        args.algo,
        args.k,
        args.eps,
        args.seed,
        budget=args.budget,
        output_dir=args.out,
        rounds_constant=args.rounds_constant,
    )
    print(
        "Adversary run finished:",
        f"{report.algorithm} vs {report.adversary}, {report.queries} queries "
        f"(budget {report.budget}) -> {report.artifact}",
    )
    print(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
    if report.refuted:
        print("Claim refuted:", report.artifact)
        return 1
    return 0


def _verify(args: argparse.Namespace) -> int:
    game = load_game(args.game)
    profile = load_profile(args.profile)
    payload = exact_regret(game, profile).to_dict()
    if args.eps is not None:
        payload["eps"] = args.eps
        payload["is_eps_ne"] = is_eps_ne(game, profile, args.eps)
        payload["is_eps_wsne"] = is_eps_wsne(game, profile, args.eps)
    print(json.dumps(payload, ensure_ascii=False, indent=2))
    return 0


def _generate(args: argparse.Namespace) -> int:
    if args.generator == "gk":
        instance = gk_sample(args.k, args.seed)
        save_game(instance.game, args.out, hidden_column=instance.hidden_column)
    else:
        save_game(generate_game(args.generator, args.k, args.seed), args.out)
    print("Game written:", f"{args.generator} k={args.k} -> {args.out}")
    return 0


COMMANDS = {
    "solve": _solve,
    "bench": _bench,
    "adversary": _adversary,
    "verify": _verify,
    "generate": _generate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")

    try:
        return COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RunFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
