"""Experiment harness: game generation, the algorithm registry and seeded trials."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .approx import ALPHA, KsMode, LemmaHypothesisError, bbm_query_ne, ks_query_wsne
from .games import (
    SIGNED_RANGE,
    UNIT_RANGE,
    BimatrixGame,
    MixedProfile,
    RegretReport,
    derived_zero_sum,
    exact_regret,
    is_eps_ne,
    is_eps_wsne,
    parse_game,
    save_game,
)
from .lower_bounds import (
    DeterministicAdversary,
    RefutationMismatch,
    ZeroAdversary,
    adversary_budget,
    gk_sample,
    halfgame_refute,
    refute_deterministic,
    uniform_sampler,
    zero_adversary_refute,
)
from .oracle import (
    BudgetExhaustedError,
    MatrixOracle,
    PayoffOracle,
    RunFailure,
    budgeted,
    difference_oracle,
)
from .zerosum import (
    DEFAULT_ROUNDS_CONSTANT,
    ConversionPreconditionError,
    MwuConfig,
    derive_seed,
    mwu_zero_sum,
    zerosum_wsne,
)

LOGGER = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_OUTPUT_PATH",
    "DEFAULT_ARTIFACT_DIRECTORY",
    "TRIAL_FIELD_ORDER",
    "GENERATORS",
    "ADVERSARIES",
    "ALGORITHMS",
    "AlgorithmSpec",
    "ExperimentSpec",
    "TrialRecord",
    "AdversaryReport",
    "ClaimCheck",
    "verify_claim",
    "mix_seed",
    "generate_game",
    "resolve_algorithm",
    "run_algorithm",
    "run_trial",
    "run_experiment",
    "summarize",
    "write_trials_csv",
    "run_adversary",
]

DEFAULT_OUTPUT_PATH = Path("results/trials.csv")
DEFAULT_ARTIFACT_DIRECTORY = Path("results/adversary")

TRIAL_FIELD_ORDER = [
    "seed",
    "queries",
    "success",
    "regret",
    "wsne_violation",
    "branch",
    "wall_time_ms",
]

UNIFORM = "uniform"
ZERO_ONE_CONSTANT_SUM = "zero-one-constant-sum"
ZERO_SUM = "zero-sum"
HIDDEN_COLUMN = "gk"
GENERATORS = (UNIFORM, ZERO_ONE_CONSTANT_SUM, ZERO_SUM, HIDDEN_COLUMN)
ADVERSARIES = ("deterministic", "gk", "zeros")

_MASK_64 = (1 << 64) - 1


def mix_seed(seed: int, trial: int) -> int:
    """Trial seed from the root seed (splitmix64 finalizer)."""

    z = (int(seed) + (int(trial) + 1) * 0x9E3779B97F4A7C15) & _MASK_64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK_64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK_64
    return z ^ (z >> 31)


def generate_game(kind: str, k: int, seed: int) -> BimatrixGame:
    if k < 2:
        raise ValueError(f"generated games need k >= 2, got {k}")
    rng = np.random.default_rng(seed)
    if kind == UNIFORM:
        return BimatrixGame(rng.random((k, k)), rng.random((k, k)))
    if kind == ZERO_ONE_CONSTANT_SUM:
        row_payoffs = rng.integers(0, 2, size=(k, k)).astype(float)
        return BimatrixGame(row_payoffs, 1.0 - row_payoffs)
    if kind == ZERO_SUM:
        row_payoffs = rng.uniform(-1.0, 1.0, size=(k, k))
        return BimatrixGame(row_payoffs, -row_payoffs, SIGNED_RANGE)
    if kind == HIDDEN_COLUMN:
        return gk_sample(k, seed).game
    raise ValueError(f"unknown generator {kind!r}; expected one of {', '.join(GENERATORS)}")


# -- algorithm registry ----------------------------------------------------------

Runner = Callable[[PayoffOracle, int, float, int, float], Tuple[MixedProfile, str]]


def _run_mwu(oracle, k, eps, seed, rounds_constant):
    config = MwuConfig.for_accuracy(k, eps, seed, rounds_constant)
    return mwu_zero_sum(oracle, k, config), "average"


def _run_zerosum_wsne(oracle, k, eps, seed, rounds_constant):
    result = zerosum_wsne(oracle, k, eps, seed, rounds_constant=rounds_constant)
    branch = "unchanged" if result.profile is result.equilibrium else "shifted"
    return result.profile, branch


def _run_bbm(oracle, k, eps, seed, rounds_constant):
    outcome = bbm_query_ne(oracle, k, eps, seed, rounds_constant=rounds_constant)
    return outcome.profile, outcome.branch.value


def _run_ks(oracle, k, eps, seed, rounds_constant):
    outcome = ks_query_wsne(oracle, k, eps, seed, KsMode.GENERAL, rounds_constant=rounds_constant)
    return outcome.profile, outcome.branch.value


def _run_ks_zero_one(oracle, k, eps, seed, rounds_constant):
    outcome = ks_query_wsne(oracle, k, eps, seed, KsMode.ZERO_ONE, rounds_constant=rounds_constant)
    return outcome.profile, outcome.branch.value


def _run_uniform_sampler(oracle, k, eps, seed, rounds_constant):
    remaining = oracle.remaining()
    queries = remaining if remaining is not None else k * k // 16
    return uniform_sampler(oracle, k, queries, seed), "guess"


@dataclass(frozen=True)
class AlgorithmSpec:
    """One registered algorithm and the guarantee it claims."""

    name: str
    claim: str
    level_offset: float
    zero_sum: bool
    generators: Tuple[str, ...]
    runner: Runner
    eps_upper: float = 1.0
    eps_upper_inclusive: bool = False

    def claimed_level(self, eps: float) -> float:
        return self.level_offset + eps

    def check_eps(self, eps: float) -> None:
        upper_ok = eps <= self.eps_upper if self.eps_upper_inclusive else eps < self.eps_upper
        if not (eps > 0.0 and upper_ok):
            bracket = "]" if self.eps_upper_inclusive else ")"
            raise ValueError(
                f"eps={eps!r} outside (0, {self.eps_upper:g}{bracket} for algorithm {self.name!r}"
            )

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "claim": self.claim,
            "level": f"{self.level_offset:.6g} + eps" if self.level_offset else "eps",
            "zero_sum": self.zero_sum,
            "generators": list(self.generators),
        }


ALGORITHMS: Dict[str, AlgorithmSpec] = {
    spec.name: spec
    for spec in (
        AlgorithmSpec("mwu", "ne", 0.0, True, (ZERO_SUM,), _run_mwu, 1.0, True),
        AlgorithmSpec("zerosum-wsne", "wsne", 0.0, True, (ZERO_SUM,), _run_zerosum_wsne, 1.0, True),
        AlgorithmSpec(
            "bbm", "ne", ALPHA, False, (UNIFORM, ZERO_ONE_CONSTANT_SUM, HIDDEN_COLUMN), _run_bbm
        ),
        AlgorithmSpec(
            "ks", "wsne", 2.0 / 3.0, False, (UNIFORM, ZERO_ONE_CONSTANT_SUM, HIDDEN_COLUMN), _run_ks
        ),
        AlgorithmSpec(
            "ks-zero-one", "wsne", 0.5, False, (ZERO_ONE_CONSTANT_SUM, HIDDEN_COLUMN), _run_ks_zero_one
        ),
        AlgorithmSpec(
            "uniform-sampler",
            "ne",
            0.0,
            False,
            (HIDDEN_COLUMN, ZERO_ONE_CONSTANT_SUM, UNIFORM),
            _run_uniform_sampler,
        ),
    )
}


def resolve_algorithm(name: str) -> AlgorithmSpec:
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}"
        ) from None


_FAILURE_BRANCHES: Sequence[Tuple[type, str]] = (
    (BudgetExhaustedError, "budget-exhausted"),
    (ConversionPreconditionError, "conversion-failed"),
    (LemmaHypothesisError, "lemma-failed"),
    (RefutationMismatch, "refutation-mismatch"),
)


def _failure_branch(exc: RunFailure) -> str:
    for kind, label in _FAILURE_BRANCHES:
        if isinstance(exc, kind):
            return label
    return "failed"


def run_algorithm(
    algorithm: AlgorithmSpec,
    oracle: PayoffOracle,
    k: int,
    eps: float,
    seed: int,
    rounds_constant: float = DEFAULT_ROUNDS_CONSTANT,
) -> Tuple[MixedProfile, str, bool]:
    """Run ``algorithm`` and return ``(profile, branch, completed)``.

    Zero-sum algorithms on a [0, 1] oracle run on its difference game. A
    failed run yields its partial profile, or the uniform profile.
    """

    if algorithm.zero_sum and oracle.payoff_range == UNIT_RANGE:
        oracle = difference_oracle(oracle)
    try:
        profile, branch = algorithm.runner(oracle, k, eps, seed, rounds_constant)
    except RunFailure as exc:
        LOGGER.warning("%s run failed (seed %d): %s", algorithm.name, seed, exc)
        profile = exc.partial_profile if exc.partial_profile is not None else MixedProfile.uniform(k)
        return profile, _failure_branch(exc), False
    return profile, branch, True


# -- experiments -----------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    """A batch of seeded trials; ``generator`` is a generator name or a game file path."""

    algorithm: str
    k: Optional[int] = None
    eps: float = 0.1
    trials: int = 1
    seed: int = 0
    budget: Optional[int] = None
    generator: str = UNIFORM
    output: Optional[Path] = DEFAULT_OUTPUT_PATH
    rounds_constant: float = DEFAULT_ROUNDS_CONSTANT
    workers: int = 1
    timing: bool = False


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    queries: int
    success: bool
    regret: float
    wsne_violation: float
    branch: str
    wall_time_ms: int = 0

    def to_row(self) -> Dict[str, object]:
        return {
            "seed": self.seed,
            "queries": self.queries,
            "success": "true" if self.success else "false",
            "regret": format(self.regret, ".10g"),
            "wsne_violation": format(self.wsne_violation, ".10g"),
            "branch": self.branch,
            "wall_time_ms": self.wall_time_ms,
        }


@dataclass(frozen=True, eq=False)
class _PreparedExperiment:
    spec: ExperimentSpec
    k: int
    fixed_game: Optional[BimatrixGame]


def _prepare(spec: ExperimentSpec) -> _PreparedExperiment:
    """Validate ``spec`` completely before the first trial runs."""

    algorithm = resolve_algorithm(spec.algorithm)
    if spec.trials < 1:
        raise ValueError(f"trials must be at least 1, got {spec.trials}")
    if spec.budget is not None and spec.budget < 0:
        raise ValueError(f"budget must be non-negative, got {spec.budget}")
    if spec.workers < 1:
        raise ValueError(f"workers must be at least 1, got {spec.workers}")
    if spec.rounds_constant <= 0:
        raise ValueError(f"rounds constant must be positive, got {spec.rounds_constant}")
    if not 0 <= spec.seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {spec.seed}")
    algorithm.check_eps(spec.eps)

    fixed_game: Optional[BimatrixGame] = None
    if spec.generator in GENERATORS:
        if spec.generator not in algorithm.generators:
            raise ValueError(
                f"algorithm {algorithm.name!r} does not accept generator {spec.generator!r}"
            )
        if spec.k is None or spec.k < 2:
            raise ValueError(f"k must be at least 2, got {spec.k}")
        k = spec.k
    else:
        path = Path(spec.generator)
        if not path.exists():
            raise FileNotFoundError(f"Game file not found: {path}")
        fixed_game, _ = parse_game(path.read_text(encoding="utf-8"))
        if spec.k is not None and spec.k != fixed_game.k:
            raise ValueError(f"--k {spec.k} does not match the {fixed_game.k}x{fixed_game.k} game file")
        k = fixed_game.k
        if k < 2:
            raise ValueError("game files for experiments need k >= 2")
        if algorithm.zero_sum:
            if fixed_game.payoff_range == SIGNED_RANGE and not fixed_game.is_zero_sum:
                raise ValueError("zero-sum algorithms need a zero-sum game or a [0, 1] game")
        elif fixed_game.payoff_range != UNIT_RANGE:
            raise ValueError(f"algorithm {algorithm.name!r} needs payoffs in [0, 1]")
    return _PreparedExperiment(spec=spec, k=k, fixed_game=fixed_game)


@dataclass(frozen=True)
class ClaimCheck:
    """Exact verdict on an algorithm's claim at its level."""

    verified: bool
    level: float
    report: RegretReport


def verify_claim(
    algorithm: AlgorithmSpec, game: BimatrixGame, profile: MixedProfile, eps: float
) -> ClaimCheck:
    """Check ``profile`` against the algorithm's claim.

    Zero-sum claims on a [0, 1] game are checked on (R - C, C - R).
    """

    target = game
    if algorithm.zero_sum and game.payoff_range == UNIT_RANGE:
        target = derived_zero_sum(game)
    level = min(algorithm.claimed_level(eps), target.payoff_range.width)
    check = is_eps_wsne if algorithm.claim == "wsne" else is_eps_ne
    return ClaimCheck(
        verified=check(target, profile, level),
        level=level,
        report=exact_regret(target, profile),
    )


def _trial(prepared: _PreparedExperiment, trial: int) -> TrialRecord:
    spec = prepared.spec
    algorithm = resolve_algorithm(spec.algorithm)
    seed = mix_seed(spec.seed, trial)
    if prepared.fixed_game is not None:
        game = prepared.fixed_game
    else:
        game = generate_game(spec.generator, prepared.k, derive_seed(seed, 0))

    oracle: PayoffOracle = MatrixOracle(game, keep_log=False)
    if spec.budget is not None:
        oracle = budgeted(oracle, spec.budget)

    started = time.perf_counter()
    profile, branch, _ = run_algorithm(
        algorithm, oracle, prepared.k, spec.eps, derive_seed(seed, 1), spec.rounds_constant
    )
    elapsed_ms = int(round((time.perf_counter() - started) * 1000)) if spec.timing else 0

    check = verify_claim(algorithm, game, profile, spec.eps)
    return TrialRecord(
        seed=seed,
        queries=oracle.ledger.total_count,
        success=check.verified,
        regret=check.report.max_regret,
        wsne_violation=check.report.max_wsne_violation,
        branch=branch,
        wall_time_ms=elapsed_ms,
    )


def run_trial(spec: ExperimentSpec, trial: int) -> TrialRecord:
    """Run trial number ``trial`` of ``spec`` on its own."""

    return _trial(_prepare(spec), trial)


def write_trials_csv(records: Sequence[TrialRecord], output_path: Path) -> Path:
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with output_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=TRIAL_FIELD_ORDER, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_row())
    return output_path


def run_experiment(spec: ExperimentSpec) -> List[TrialRecord]:
    """Run every trial of ``spec``; rows keep trial order and go to ``spec.output`` if set."""

    prepared = _prepare(spec)
    trials = range(spec.trials)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(_trial, [prepared] * spec.trials, trials))
    else:
        records = [_trial(prepared, trial) for trial in trials]

    summary = summarize(records)
    LOGGER.info(
        "%s k=%d eps=%g rounds_constant=%g: %d trials, success rate %.3f, mean queries %.1f",
        spec.algorithm,
        prepared.k,
        spec.eps,
        spec.rounds_constant,
        len(records),
        summary["success_rate"],
        summary["mean_queries"],
    )
    if spec.output is not None:
        write_trials_csv(records, spec.output)
    return records


def summarize(records: Sequence[TrialRecord]) -> Dict[str, float]:
    if not records:
        return {"trials": 0, "success_rate": 0.0, "mean_queries": 0.0, "max_regret": 0.0}
    return {
        "trials": len(records),
        "success_rate": sum(record.success for record in records) / len(records),
        "mean_queries": float(np.mean([record.queries for record in records])),
        "max_regret": max(record.regret for record in records),
    }


# -- adversary runs --------------------------------------------------------------


@dataclass(frozen=True)
class AdversaryReport:
    adversary: str
    algorithm: str
    k: int
    eps: float
    queries: int
    budget: int
    branch: str
    refuted: bool
    artifact: Path
    details: Mapping[str, object]

    def to_dict(self) -> Dict[str, object]:
        return {
            "adversary": self.adversary,
            "algorithm": self.algorithm,
            "k": self.k,
            "eps": self.eps,
            "queries": self.queries,
            "budget": self.budget,
            "branch": self.branch,
            "refuted": self.refuted,
            "artifact": str(self.artifact),
            "details": dict(self.details),
        }


def _default_budget(adversary: str, k: int, eps: float) -> int:
    if adversary == "deterministic":
        return adversary_budget(k, eps)
    if adversary == "gk":
        return k * k // 16
    return k - 2


def run_adversary(
    adversary: str,
    algorithm_name: str,
    k: int,
    eps: float,
    seed: int,
    *,
    budget: Optional[int] = None,
    output_dir: Path = DEFAULT_ARTIFACT_DIRECTORY,
    rounds_constant: float = DEFAULT_ROUNDS_CONSTANT,
) -> AdversaryReport:
    """Run one algorithm against an adversary and write the refutation artifact.

    ``deterministic`` completes the partial game around a hidden column and
    checks the output against (½ − eps); ``gk`` draws a hidden-column
    instance; ``zeros`` answers 0 everywhere and looks for a witness game
    against an eps-WSNE claim.
    """

    if adversary not in ADVERSARIES:
        raise ValueError(f"unknown adversary {adversary!r}; expected one of {', '.join(ADVERSARIES)}")
    algorithm = resolve_algorithm(algorithm_name)
    algorithm.check_eps(eps)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if adversary == "deterministic" and not eps < 0.5:
        raise ValueError(f"the deterministic adversary needs eps < 1/2, got {eps}")
    budget = _default_budget(adversary, k, eps) if budget is None else budget
    if budget < 0:
        raise ValueError(f"budget must be non-negative, got {budget}")
    output_dir = Path(output_dir)

    instance = None
    if adversary == "deterministic":
        inner: PayoffOracle = DeterministicAdversary(k, eps)
    elif adversary == "gk":
        instance = gk_sample(k, derive_seed(seed, 0))
        inner = MatrixOracle(instance.game)
    else:
        inner = ZeroAdversary(k)

    oracle = budgeted(inner, budget)
    profile, branch, _ = run_algorithm(
        algorithm, oracle, k, eps, derive_seed(seed, 1), rounds_constant
    )
    queries = inner.ledger.total_count
    stem = f"{adversary}-{algorithm.name}-k{k}-seed{seed}"

    if adversary == "deterministic":
        refutation = refute_deterministic(inner.state, profile, eps)
        artifact = save_game(refutation.game, output_dir / f"{stem}-completion.txt")
        refuted = refutation.refuted
        details: Dict[str, object] = refutation.to_dict()
    elif adversary == "gk":
        refuted = halfgame_refute(instance, profile)
        artifact = save_game(
            instance.game, output_dir / f"{stem}-instance.txt", hidden_column=instance.hidden_column
        )
        details = {
            "hidden_column": instance.hidden_column,
            "hidden_mass": float(profile.col_strategy[instance.hidden_column]),
            "max_regret": exact_regret(instance.game, profile).max_regret,
        }
    else:
        witness = zero_adversary_refute(inner.ledger, profile, eps)
        refuted = witness is not None
        if witness is not None and is_eps_wsne(witness, profile, eps):
            raise RefutationMismatch("witness game does not refute the WSNE claim", profile)
        artifact = output_dir / f"{stem}-witness.txt"
        if witness is not None:
            save_game(witness, artifact)
        details = {
            "witness": witness is not None,
            "wsne_violation": exact_regret(witness, profile).max_wsne_violation if witness else 0.0,
        }

    LOGGER.info(
        "%s vs %s: %d queries (budget %d), refuted=%s", algorithm.name, adversary, queries, budget, refuted
    )
    return AdversaryReport(
        adversary=adversary,
        algorithm=algorithm.name,
        k=k,
        eps=eps,
        queries=queries,
        budget=budget,
        branch=branch,
        refuted=refuted,
        artifact=artifact,
        details=details,
    )
