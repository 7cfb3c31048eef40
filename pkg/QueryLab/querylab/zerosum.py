"""Query-efficient solving of zero-sum games.

The solver runs two multiplicative-weights learners against each other. Each
round both players sample one pure strategy from the opponent's current mix
and pay k queries to read the full line of payoffs it induces. Sampled
payoff vectors, the NE to WSNE conversion and the combined
``zerosum_wsne`` pipeline build on top of it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .games import PROBABILITY_TOLERANCE, MixedProfile
from .oracle import BudgetExhausted, BudgetExhaustedError, PayoffOracle, RunFailure, expect

LOGGER = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_ROUNDS_CONSTANT",
    "DEFAULT_SAMPLING_CONSTANT",
    "Player",
    "ApproxPayoffVector",
    "MwuConfig",
    "ConversionPreconditionError",
    "ZeroSumWsneResult",
    "derive_seed",
    "sample_count",
    "mwu_zero_sum",
    "estimate_payoff_vector",
    "approx_best_response",
    "approx_regret",
    "ne_to_wsne",
    "zerosum_ne_with_vectors",
    "zerosum_wsne",
    "zerosum_wsne_query_bound",
]

DEFAULT_ROUNDS_CONSTANT = 16.0
DEFAULT_SAMPLING_CONSTANT = 8.0
WSNE_ACCURACY_DIVISOR = 24.0


class Player(str, Enum):
    ROW = "row"
    COLUMN = "column"

    @property
    def other(self) -> "Player":
        return Player.COLUMN if self is Player.ROW else Player.ROW


class ConversionPreconditionError(RunFailure):
    """The NE to WSNE conversion found more mass on bad strategies than its inputs allow."""


def derive_seed(seed: int, stream: int) -> int:
    """Independent 64-bit child seed number ``stream`` of ``seed``."""

    state = np.random.SeedSequence([int(seed), int(stream)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _check_seed(seed: int) -> None:
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")


@dataclass(frozen=True, eq=False)
class ApproxPayoffVector:
    """Estimated payoffs of one player's pure strategies against a fixed opponent mix."""

    values: np.ndarray
    accuracy: float
    player: Player
    sample_count_per_entry: int

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1 or not np.all(np.isfinite(values)):
            raise ValueError("payoff vector must be a non-empty finite vector")
        if self.accuracy < 0:
            raise ValueError(f"accuracy must be non-negative, got {self.accuracy}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "player", Player(self.player))

    @classmethod
    def exact(cls, values: np.ndarray, player: Player) -> "ApproxPayoffVector":
        """Wrap exactly known payoffs (accuracy 0, no samples)."""

        return cls(values=values, accuracy=0.0, player=player, sample_count_per_entry=0)

    @property
    def k(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class MwuConfig:
    epsilon: float
    rounds: int
    learning_rate: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be at least 1, got {self.rounds}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning rate must lie in (0, 1], got {self.learning_rate}")
        _check_seed(self.seed)

    @classmethod
    def for_accuracy(
        cls,
        k: int,
        epsilon: float,
        seed: int = 0,
        rounds_constant: float = DEFAULT_ROUNDS_CONSTANT,
    ) -> "MwuConfig":
        """rounds = ⌈c₀·ln k/ε²⌉ and η = √(ln k/rounds)."""

        if k < 2:
            raise ValueError(f"the zero-sum solver needs k >= 2, got {k}")
        if rounds_constant <= 0:
            raise ValueError(f"rounds constant must be positive, got {rounds_constant}")
        log_k = math.log(k)
        rounds = max(1, math.ceil(rounds_constant * log_k / epsilon**2))
        learning_rate = min(1.0, math.sqrt(log_k / rounds))
        return cls(epsilon=epsilon, rounds=rounds, learning_rate=learning_rate, seed=seed)


@dataclass(frozen=True)
class ZeroSumWsneResult:
    profile: MixedProfile
    equilibrium: MixedProfile
    row_vector: ApproxPayoffVector
    col_vector: ApproxPayoffVector
    queries: int


def _softmax(log_weights: np.ndarray) -> np.ndarray:
    shifted = np.exp(log_weights - log_weights.max())
    return shifted / shifted.sum()


def _sample_index(rng: np.random.Generator, probabilities: np.ndarray) -> int:
    cumulative = np.cumsum(probabilities)
    index = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    return min(index, probabilities.size - 1)


def _average_profile(x_sum: np.ndarray, y_sum: np.ndarray) -> MixedProfile:
    return MixedProfile(x_sum / x_sum.sum(), y_sum / y_sum.sum())


def mwu_zero_sum(oracle: PayoffOracle, k: int, config: MwuConfig) -> MixedProfile:
    """Average profile of two multiplicative-weights learners in self-play.

    Uses exactly ``2 * k * config.rounds`` queries.
    """

    if k < 2:
        raise ValueError(f"the zero-sum solver needs k >= 2, got {k}")
    if oracle.k != k:
        raise ValueError(f"oracle serves a {oracle.k}x{oracle.k} game, expected k={k}")

    rng = np.random.default_rng(config.seed)
    eta = config.learning_rate
    row_log_weights = np.zeros(k)
    col_log_weights = np.zeros(k)
    x_sum = np.zeros(k)
    y_sum = np.zeros(k)

    for round_index in range(config.rounds):
        x = _softmax(row_log_weights)
        y = _softmax(col_log_weights)
        x_sum += x
        y_sum += y

        sampled_col = _sample_index(rng, y)
        sampled_row = _sample_index(rng, x)
        column = oracle.query_column(sampled_col)
        row = oracle.query_row(sampled_row) if not isinstance(column, BudgetExhausted) else column
        if isinstance(row, BudgetExhausted):
            raise BudgetExhaustedError(
                f"query budget exhausted in round {round_index + 1} of {config.rounds}",
                partial_profile=_average_profile(x_sum, y_sum),
            )

        row_log_weights += eta * column.row_payoffs
        col_log_weights += eta * row.col_payoffs

    LOGGER.debug("MWU finished %d rounds (eta=%.4g)", config.rounds, eta)
    return _average_profile(x_sum, y_sum)


def sample_count(k: int, eps: float, constant: float = DEFAULT_SAMPLING_CONSTANT) -> int:
    """Samples per entry, ⌈8·ln k/eps²⌉ (at least one)."""

    return max(1, math.ceil(constant * math.log(k) / eps**2))


def _opponent_distribution(values: np.ndarray, k: int) -> np.ndarray:
    p = np.array(values, dtype=float)
    if p.shape != (k,):
        raise ValueError(f"opponent strategy must have length {k}, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("opponent strategy has NaN or negative mass")
    total = float(p.sum())
    if abs(total - 1.0) > PROBABILITY_TOLERANCE:
        raise ValueError(f"opponent strategy sums to {total!r}, expected 1")
    return p / total


def estimate_payoff_vector(
    oracle: PayoffOracle,
    opponent_strategy: np.ndarray,
    player: Player,
    eps: float,
    seed: int,
) -> ApproxPayoffVector:
    """Sample-mean payoffs of every pure strategy of ``player``.

    Each entry averages T = ⌈8·ln k/eps²⌉ i.i.d. opponent draws. The draws
    are taken as one multinomial count vector per entry and charged as k·T
    queries.
    """

    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    _check_seed(seed)
    player = Player(player)
    k = oracle.k
    p = _opponent_distribution(opponent_strategy, k)
    samples = sample_count(k, eps)

    rng = np.random.default_rng(seed)
    counts = rng.multinomial(samples, p, size=k)
    own, opponent = np.nonzero(counts)
    cell_counts = counts[own, opponent]

    if player is Player.ROW:
        answers = expect(oracle.query_cells(own, opponent, cell_counts))
        payoffs = answers.row_payoffs
    else:
        answers = expect(oracle.query_cells(opponent, own, cell_counts))
        payoffs = answers.col_payoffs

    weights = cell_counts / samples
    values = np.bincount(own, weights=weights * payoffs, minlength=k)
    return ApproxPayoffVector(
        values=values, accuracy=eps, player=player, sample_count_per_entry=samples
    )


def approx_best_response(vector: ApproxPayoffVector) -> int:
    """Best response according to ``vector``; lowest index on ties."""

    return int(np.argmax(vector.values))


def approx_regret(vector: ApproxPayoffVector, own_strategy: np.ndarray) -> float:
    strategy = np.asarray(own_strategy, dtype=float)
    if strategy.shape != vector.values.shape:
        raise ValueError("strategy and payoff vector differ in length")
    return float(vector.values.max() - strategy @ vector.values)


def _shift_bad_mass(
    strategy: np.ndarray, vector: ApproxPayoffVector, eps: float, label: str
) -> np.ndarray:
    best = approx_best_response(vector)
    bad = vector.values[best] > vector.values + eps / 4.0
    mass = float(strategy[bad].sum())
    if mass > eps / 2.0 + PROBABILITY_TOLERANCE:
        raise ConversionPreconditionError(
            f"{label} strategy puts {mass:.6g} > eps/2 on strategies far below the best response"
        )
    if mass == 0.0:
        return strategy
    shifted = strategy.copy()
    shifted[best] += mass
    shifted[bad] = 0.0
    return shifted / shifted.sum()


def ne_to_wsne(
    profile: MixedProfile,
    row_vector: ApproxPayoffVector,
    col_vector: ApproxPayoffVector,
    eps: float,
) -> MixedProfile:
    """Turn an (eps²/24)-NE with (eps²/24)-accurate payoff vectors into an eps-WSNE.

    Mass on strategies more than eps/4 below the approximate best response
    moves onto that best response. No queries are made.
    """

    if not 0.0 < eps:
        raise ValueError(f"eps must be positive, got {eps}")
    if row_vector.player is not Player.ROW or col_vector.player is not Player.COLUMN:
        raise ValueError("expected a row payoff vector and a column payoff vector")
    if row_vector.k != profile.k or col_vector.k != profile.k:
        raise ValueError("payoff vectors do not match the profile dimension")
    required = eps**2 / WSNE_ACCURACY_DIVISOR
    for vector in (row_vector, col_vector):
        if vector.accuracy > required + PROBABILITY_TOLERANCE:
            raise ConversionPreconditionError(
                f"{vector.player.value} payoff vector accuracy {vector.accuracy:.3g} "
                f"exceeds eps^2/24 = {required:.3g}",
                partial_profile=profile,
            )

    try:
        x = _shift_bad_mass(profile.row_strategy, row_vector, eps, "row")
        y = _shift_bad_mass(profile.col_strategy, col_vector, eps, "column")
    except ConversionPreconditionError as exc:
        raise exc.with_profile(profile)

    if x is profile.row_strategy and y is profile.col_strategy:
        return profile
    return MixedProfile(x, y)


def zerosum_ne_with_vectors(
    oracle: PayoffOracle,
    k: int,
    eps: float,
    seed: int,
    *,
    rounds_constant: float = DEFAULT_ROUNDS_CONSTANT,
) -> Tuple[MixedProfile, ApproxPayoffVector, ApproxPayoffVector]:
    """An eps-NE of a zero-sum game plus eps-accurate payoff vectors of both players."""

    _check_seed(seed)
    config = MwuConfig.for_accuracy(k, eps, derive_seed(seed, 0), rounds_constant)
    start = oracle.ledger.total_count
    profile = mwu_zero_sum(oracle, k, config)
    LOGGER.debug("zero-sum stage: %d queries", oracle.ledger.total_count - start)

    try:
        row_vector = estimate_payoff_vector(
            oracle, profile.col_strategy, Player.ROW, eps, derive_seed(seed, 1)
        )
        col_vector = estimate_payoff_vector(
            oracle, profile.row_strategy, Player.COLUMN, eps, derive_seed(seed, 2)
        )
    except RunFailure as exc:
        raise exc.with_profile(profile)
    return profile, row_vector, col_vector


def zerosum_wsne(
    oracle: PayoffOracle,
    k: int,
    eps: float,
    seed: int,
    *,
    rounds_constant: float = DEFAULT_ROUNDS_CONSTANT,
) -> ZeroSumWsneResult:
    """eps-WSNE of a zero-sum game with payoffs in [-1, 1]."""

    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    start = oracle.ledger.total_count
    inner = eps**2 / WSNE_ACCURACY_DIVISOR
    equilibrium, row_vector, col_vector = zerosum_ne_with_vectors(
        oracle, k, inner, seed, rounds_constant=rounds_constant
    )
    profile = ne_to_wsne(equilibrium, row_vector, col_vector, eps)
    queries = oracle.ledger.total_count - start
    LOGGER.debug("zero-sum WSNE: %d queries at eps=%.4g", queries, eps)
    return ZeroSumWsneResult(
        profile=profile,
        equilibrium=equilibrium,
        row_vector=row_vector,
        col_vector=col_vector,
        queries=queries,
    )


def zerosum_wsne_query_bound(
    k: int, eps: float, rounds_constant: float = DEFAULT_ROUNDS_CONSTANT
) -> float:
    """Upper bound C·k·ln k/eps⁴ + 4k on the queries of :func:`zerosum_wsne`.

    C = 2·(c₀ + 8)·24², i.e. 27648 for the default c₀ = 16.
    """

    constant = 2.0 * (rounds_constant + DEFAULT_SAMPLING_CONSTANT) * WSNE_ACCURACY_DIVISOR**2
    return constant * k * math.log(k) / eps**4 + 4.0 * k
