"""Exact Nash equilibria of small games by support enumeration."""

from __future__ import annotations

import itertools
import logging
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .games import BimatrixGame, MixedProfile

LOGGER = logging.getLogger(__name__)

MAX_BRUTE_FORCE_K = 6
CONDITION_LIMIT = 1e12
ORACLE_TOLERANCE = 1e-6


class DegenerateGameError(RuntimeError):
    """Support enumeration found no equilibrium among the non-singular supports."""


def _indifference_system(payoffs: np.ndarray) -> np.ndarray:
    """Matrix of ``payoffs · p = v·1, Σp = 1`` for a square support block.

    ``payoffs`` is oriented so that its rows are the opponent's strategies
    that must be made indifferent.
    """

    size = payoffs.shape[0]
    system = np.zeros((size + 1, size + 1))
    system[:size, :size] = payoffs
    system[:size, size] = -1.0
    system[size, :size] = 1.0
    return system


def _solve_indifference(payoffs: np.ndarray) -> Optional[np.ndarray]:
    system = _indifference_system(payoffs)
    if np.linalg.cond(system) > CONDITION_LIMIT:
        return None
    rhs = np.zeros(system.shape[0])
    rhs[-1] = 1.0
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return None
    probabilities = solution[:-1]
    if np.any(probabilities < -ORACLE_TOLERANCE):
        return None
    return np.clip(probabilities, 0.0, None)


def _support_pairs(k: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    for size in range(1, k + 1):
        for rows in itertools.combinations(range(k), size):
            for cols in itertools.combinations(range(k), size):
                yield rows, cols


def _expand(k: int, support: Sequence[int], probabilities: np.ndarray) -> np.ndarray:
    vector = np.zeros(k)
    vector[list(support)] = probabilities
    return vector / vector.sum()


def _is_best_response_pair(game: BimatrixGame, x: np.ndarray, y: np.ndarray) -> bool:
    row_values = game.row_payoffs @ y
    col_values = x @ game.col_payoffs
    row_ok = row_values.max() - x @ row_values <= ORACLE_TOLERANCE
    col_ok = col_values.max() - col_values @ y <= ORACLE_TOLERANCE
    return bool(row_ok and col_ok)


def brute_force_equilibrium(game: BimatrixGame) -> MixedProfile:
    """Return the first exact equilibrium found by equal-size support enumeration.

    Supports are tried by increasing size, then lexicographically, so pure
    equilibria with the lowest indices win.
    """

    k = game.k
    if k > MAX_BRUTE_FORCE_K:
        raise ValueError(f"support enumeration is limited to k <= {MAX_BRUTE_FORCE_K}, got {k}")

    skipped = 0
    for rows, cols in _support_pairs(k):
        block_rows = list(rows)
        block_cols = list(cols)
        # y makes the row player indifferent over ``rows``
        y_part = _solve_indifference(game.row_payoffs[np.ix_(block_rows, block_cols)])
        # x makes the column player indifferent over ``cols``
        x_part = _solve_indifference(game.col_payoffs[np.ix_(block_rows, block_cols)].T)
        if y_part is None or x_part is None:
            skipped += 1
            continue
        if y_part.sum() <= 0 or x_part.sum() <= 0:
            continue
        x = _expand(k, rows, x_part)
        y = _expand(k, cols, y_part)
        if _is_best_response_pair(game, x, y):
            LOGGER.debug(
                "Equilibrium on supports %s x %s (%d singular systems skipped)",
                rows,
                cols,
                skipped,
            )
            return MixedProfile(x, y)

    raise DegenerateGameError(
        f"no equilibrium found for a {k}x{k} game ({skipped} singular support systems skipped)"
    )


def zero_sum_value(game: BimatrixGame) -> float:
    """Row player's equilibrium payoff of a zero-sum game."""

    if not game.is_zero_sum:
        raise ValueError("the game value is only defined for zero-sum games")
    profile = brute_force_equilibrium(game)
    row_payoff, _ = game.payoffs(profile)
    return row_payoff
