"""Adversaries and hard instances behind the query lower bounds.

Three constructions live here:

* the deterministic hidden-column adversary, which answers (0, 1) while a
  column is lightly queried and (1, 0) afterwards, then completes the
  partial game around a column the algorithm barely looked at;
* the random hidden-column distribution, where one column pays the column
  player 1 everywhere and every other column hides a single 0;
* the all-zeros adversary, which refutes any WSNE claim made before enough
  cells were seen.

Every completed or sampled game is zero-one and constant-sum with constant 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .games import UNIT_RANGE, BimatrixGame, MixedProfile, RegretReport, exact_regret, is_eps_ne
from .oracle import (
    CellAnswers,
    MatrixOracle,
    PayoffOracle,
    QueryAnswer,
    QueryLedger,
    RunFailure,
    expect,
    unresolved_columns,
)
from .zerosum import derive_seed

LOGGER = logging.getLogger(__name__)

__all__ = [
    "EPS_DENOMINATOR",
    "RefutationMismatch",
    "PartialGame",
    "DeterministicAdversary",
    "DeterministicRefutation",
    "HiddenColumnInstance",
    "ZeroAdversary",
    "as_rational",
    "adversary_budget",
    "light_columns",
    "det_adversary_answer",
    "choose_hidden_column",
    "det_adversary_complete",
    "refute_deterministic",
    "hidden_column_instance",
    "gk_sample",
    "halfgame_refute",
    "zero_adversary_refute",
    "probe_columns",
    "resolve_rate",
    "uniform_sampler",
]

EPS_DENOMINATOR = 10**6

HIDE = QueryAnswer(0.0, 1.0)
REVEAL = QueryAnswer(1.0, 0.0)

EpsLike = Union[float, Fraction]


class RefutationMismatch(RunFailure):
    """A refutation shortcut disagreed with the exact regret computation."""


def as_rational(eps: EpsLike) -> Fraction:
    """Exact ε; floats are rounded to a multiple of 10⁻⁶."""

    if isinstance(eps, Fraction):
        value = eps
    else:
        value = Fraction(round(float(eps) * EPS_DENOMINATOR), EPS_DENOMINATOR)
    if not 0 < value < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return value


def adversary_budget(k: int, eps: EpsLike) -> int:
    """⌈εk²/2⌉ − 1, the largest budget below the adversary's query guarantee."""

    return math.ceil(as_rational(eps) * k * k / 2) - 1


class PartialGame:
    """The cells answered so far and how often each column was queried."""

    def __init__(self, k: int) -> None:
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        self.k = k
        self.defined = np.zeros((k, k), dtype=bool)
        self.row_payoffs = np.full((k, k), np.nan)
        self.col_payoffs = np.full((k, k), np.nan)
        self.column_counts = np.zeros(k, dtype=np.int64)

    @property
    def total_count(self) -> int:
        return int(self.column_counts.sum())

    def record(self, i: int, j: int, answer: QueryAnswer, times: int = 1) -> None:
        self.defined[i, j] = True
        self.row_payoffs[i, j] = answer.a
        self.col_payoffs[i, j] = answer.b
        self.column_counts[j] += times

    def answer(self, i: int, j: int) -> Optional[QueryAnswer]:
        if not self.defined[i, j]:
            return None
        return QueryAnswer(float(self.row_payoffs[i, j]), float(self.col_payoffs[i, j]))

    def defined_cells(self) -> Dict[Tuple[int, int], QueryAnswer]:
        rows, cols = np.nonzero(self.defined)
        return {(int(i), int(j)): self.answer(int(i), int(j)) for i, j in zip(rows, cols)}


def light_columns(state: PartialGame, eps: EpsLike) -> List[int]:
    """Columns queried fewer than ε·k times."""

    threshold = as_rational(eps) * state.k
    return [j for j in range(state.k) if int(state.column_counts[j]) < threshold]


def det_adversary_answer(state: PartialGame, i: int, j: int, eps: EpsLike) -> QueryAnswer:
    """Answer one query and record it in ``state``.

    A column that received fewer than ε·k queries before this one answers
    (0, 1); any other answers (1, 0). A cell that was already answered
    repeats its first answer.
    """

    if not (0 <= i < state.k and 0 <= j < state.k):
        raise ValueError(f"query ({i}, {j}) outside a {state.k}x{state.k} game")
    answer = state.answer(i, j)
    if answer is None:
        threshold = as_rational(eps) * state.k
        answer = HIDE if int(state.column_counts[j]) < threshold else REVEAL
    state.record(i, j, answer)
    return answer


class DeterministicAdversary(PayoffOracle):
    """Oracle answering by :func:`det_adversary_answer` in query order."""

    def __init__(self, k: int, eps: EpsLike, *, keep_log: bool = True) -> None:
        super().__init__(k, UNIT_RANGE, keep_log=keep_log)
        self.eps = as_rational(eps)
        self.state = PartialGame(k)

    def _lookup(self, rows, cols, counts):
        row_payoffs = np.empty(rows.size)
        col_payoffs = np.empty(rows.size)
        repeats = np.ones(rows.size, dtype=np.int64) if counts is None else counts
        for n, (i, j, times) in enumerate(zip(rows, cols, repeats)):
            answer = det_adversary_answer(self.state, int(i), int(j), self.eps)
            if times > 1:
                self.state.record(int(i), int(j), answer, times=int(times) - 1)
            row_payoffs[n] = answer.a
            col_payoffs[n] = answer.b
        return row_payoffs, col_payoffs


def choose_hidden_column(state: PartialGame, profile: MixedProfile, eps: EpsLike) -> int:
    """Lowest column with y_c < 2/k that received fewer than ε·k queries."""

    if profile.k != state.k:
        raise ValueError(f"profile of dimension {profile.k} does not fit k={state.k}")
    y = profile.col_strategy
    for column in light_columns(state, eps):
        if y[column] < 2.0 / state.k:
            return column
    raise ValueError(
        "no column has both y_c < 2/k and fewer than eps*k queries "
        f"({state.total_count} queries made, k={state.k})"
    )


def det_adversary_complete(
    state: PartialGame, profile: MixedProfile, eps: EpsLike
) -> BimatrixGame:
    """Fill the unqueried cells: hidden column (0, 1), everything else (1, 0)."""

    rational = as_rational(eps)
    k = state.k
    if state.total_count >= rational * k * k / 2:
        LOGGER.warning(
            "Completing after %d queries; at least eps*k^2/2 = %s were made, "
            "a hidden column is no longer guaranteed",
            state.total_count,
            float(rational * k * k / 2),
        )
    if not 2.0 / k < float(rational):
        LOGGER.warning("k=%d is too small for a guaranteed refutation at eps=%s", k, float(rational))

    hidden = choose_hidden_column(state, profile, rational)
    row_payoffs = np.where(state.defined, state.row_payoffs, 1.0)
    row_payoffs[:, hidden] = 0.0
    return BimatrixGame(row_payoffs, 1.0 - row_payoffs)


@dataclass(frozen=True)
class DeterministicRefutation:
    game: BimatrixGame
    hidden_column: int
    report: RegretReport
    row_floor: float
    floor_holds: bool
    refuted: bool

    def to_dict(self) -> dict:
        return {
            "hidden_column": self.hidden_column,
            "row_floor": self.row_floor,
            "floor_holds": self.floor_holds,
            "refuted": self.refuted,
            "report": self.report.to_dict(),
        }


def refute_deterministic(
    state: PartialGame, profile: MixedProfile, eps: EpsLike
) -> DeterministicRefutation:
    """Complete the partial game and check whether ``profile`` is a (½ − ε)-NE of it."""

    rational = as_rational(eps)
    if rational >= Fraction(1, 2):
        raise ValueError(f"the refutation level 1/2 - eps needs eps < 1/2, got {float(rational)}")
    k = state.k
    game = det_adversary_complete(state, profile, rational)
    hidden = choose_hidden_column(state, profile, rational)
    report = exact_regret(game, profile)

    floor = 1.0 - math.ceil(rational * k) / k - 2.0 / k
    floor_holds = report.row_best_response_payoff >= floor - 1e-9
    if not floor_holds:
        LOGGER.warning(
            "Row best-response payoff %.6f is below the completion floor %.6f",
            report.row_best_response_payoff,
            floor,
        )
    refuted = not is_eps_ne(game, profile, float(Fraction(1, 2) - rational))
    return DeterministicRefutation(
        game=game,
        hidden_column=hidden,
        report=report,
        row_floor=floor,
        floor_holds=floor_holds,
        refuted=refuted,
    )


@dataclass(frozen=True, eq=False)
class HiddenColumnInstance:
    """One draw: hidden column ``hidden_column``, column j hides its 0 at ``zero_rows[j]``."""

    k: int
    hidden_column: int
    zero_rows: np.ndarray
    game: BimatrixGame


def hidden_column_instance(
    k: int, hidden_column: int, zero_rows: Sequence[int]
) -> HiddenColumnInstance:
    """Materialize the instance: C[:, c] = 1, C[r_j, j] = 0 for j != c, R = 1 - C."""

    if k < 2:
        raise ValueError(f"hidden-column instances need k >= 2, got {k}")
    rows = np.array(zero_rows, dtype=np.int64)
    if rows.shape != (k,) or rows.min() < 0 or rows.max() >= k:
        raise ValueError(f"zero_rows must hold k={k} row indices")
    if not 0 <= hidden_column < k:
        raise ValueError(f"hidden column {hidden_column} outside [0, {k})")

    col_payoffs = np.ones((k, k))
    others = np.array([j for j in range(k) if j != hidden_column])
    col_payoffs[rows[others], others] = 0.0
    rows.setflags(write=False)
    return HiddenColumnInstance(
        k=k,
        hidden_column=hidden_column,
        zero_rows=rows,
        game=BimatrixGame(1.0 - col_payoffs, col_payoffs),
    )


def gk_sample(k: int, seed: int) -> HiddenColumnInstance:
    """Hidden column uniform on [k], each zero row uniform and independent."""

    if k < 2:
        raise ValueError(f"hidden-column instances need k >= 2, got {k}")
    rng = np.random.default_rng(seed)
    hidden = int(rng.integers(k))
    zero_rows = rng.integers(k, size=k)
    return hidden_column_instance(k, hidden, zero_rows)


def halfgame_refute(instance: HiddenColumnInstance, profile: MixedProfile) -> bool:
    """True when ``profile`` puts at most ½ on the hidden column.

    Such a profile cannot be a 1/(6k)-NE; the exact regret is computed as
    well and a disagreement raises :class:`RefutationMismatch`.
    """

    y_hidden = float(profile.col_strategy[instance.hidden_column])
    low_mass = y_hidden <= 0.5
    regret = exact_regret(instance.game, profile).max_regret
    if low_mass and not regret > 1.0 / (6 * instance.k):
        raise RefutationMismatch(
            f"y_c = {y_hidden:.6g} <= 1/2 but the exact regret {regret:.6g} "
            f"does not exceed 1/(6k) = {1.0 / (6 * instance.k):.6g}",
            partial_profile=profile,
        )
    return low_mass


class ZeroAdversary(PayoffOracle):
    """Answers (0, 0) to every query."""

    def __init__(self, k: int, *, keep_log: bool = True) -> None:
        super().__init__(k, UNIT_RANGE, keep_log=keep_log)

    def _lookup(self, rows, cols, counts):
        return np.zeros(rows.size), np.zeros(rows.size)


def zero_adversary_refute(
    ledger: QueryLedger, profile: MixedProfile, eps: float
) -> Optional[BimatrixGame]:
    """Witness game on which ``profile`` is not an eps-WSNE, if one exists.

    The witness pays the row player 1 on every unqueried cell of one row r
    with x_r < 1 and 0 elsewhere; it exists when the column mass on those
    cells exceeds eps.
    """

    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    if profile.k != ledger.k:
        raise ValueError(f"profile of dimension {profile.k} does not fit k={ledger.k}")
    answered = ledger.queried
    if np.any(ledger.row_payoffs[answered] != 0.0) or np.any(ledger.col_payoffs[answered] != 0.0):
        raise ValueError("ledger holds nonzero answers; it was not produced by the all-zeros adversary")

    x, y = profile.row_strategy, profile.col_strategy
    for row in range(ledger.k):
        if x[row] >= 1.0:
            continue
        unqueried = ~answered[row]
        if float(y[unqueried].sum()) > eps:
            row_payoffs = np.zeros((ledger.k, ledger.k))
            row_payoffs[row, unqueried] = 1.0
            LOGGER.debug("zero adversary witness on row %d (%d open cells)", row, int(unqueried.sum()))
            return BimatrixGame(row_payoffs, np.zeros((ledger.k, ledger.k)))
    return None


def probe_columns(oracle: PayoffOracle, k: int, per_column: int, seed: int) -> CellAnswers:
    """Query ``per_column`` distinct random rows in every column."""

    if not 0 <= per_column <= k:
        raise ValueError(f"per_column must lie in [0, {k}], got {per_column}")
    rng = np.random.default_rng(seed)
    rows = np.concatenate([rng.choice(k, size=per_column, replace=False) for _ in range(k)])
    cols = np.repeat(np.arange(k), per_column)
    return expect(oracle.query_cells(rows, cols))


def resolve_rate(k: int, per_column: int, draws: int, seed: int) -> float:
    """Fraction of non-hidden columns whose hidden 0 was found by :func:`probe_columns`."""

    if draws < 1:
        raise ValueError(f"draws must be positive, got {draws}")
    resolved = 0
    for draw in range(draws):
        instance = gk_sample(k, derive_seed(seed, 2 * draw))
        oracle = MatrixOracle(instance.game, keep_log=False)
        probe_columns(oracle, k, per_column, derive_seed(seed, 2 * draw + 1))
        unresolved = unresolved_columns(oracle.ledger)
        resolved += sum(
            1 for j in range(k) if j != instance.hidden_column and j not in unresolved
        )
    return resolved / (draws * (k - 1))


def uniform_sampler(oracle: PayoffOracle, k: int, queries: int, seed: int) -> MixedProfile:
    """Spend up to ``queries`` uniformly random cell queries, then guess.

    The guess is x uniform and y uniform over the columns still unresolved.
    The query count is capped at the oracle's remaining budget.
    """

    if queries < 0:
        raise ValueError(f"queries must be non-negative, got {queries}")
    remaining = oracle.remaining()
    count = queries if remaining is None else min(queries, remaining)
    rng = np.random.default_rng(seed)
    rows = rng.integers(k, size=count)
    cols = rng.integers(k, size=count)
    if count:
        expect(oracle.query_cells(rows, cols))

    open_columns = sorted(unresolved_columns(oracle.ledger))
    y = np.zeros(k)
    if open_columns:
        y[open_columns] = 1.0 / len(open_columns)
    else:
        y[:] = 1.0 / k
    return MixedProfile(np.full(k, 1.0 / k), y)
