from pathlib import Path
import sys

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
PACKAGE_ROOT = PROJECT_ROOT / "QueryLab"
if str(PACKAGE_ROOT) not in sys.path:
    sys.path.insert(0, str(PACKAGE_ROOT))

from querylab.games import SIGNED_RANGE, BimatrixGame, exact_regret
from querylab.support_enumeration import brute_force_equilibrium, zero_sum_value


def test_matching_pennies_equilibrium_is_uniform():
    row = np.array([[1.0, 0.0], [0.0, 1.0]])
    profile = brute_force_equilibrium(BimatrixGame(row, 1.0 - row))
    assert np.allclose(profile.row_strategy, [0.5, 0.5])
    assert np.allclose(profile.col_strategy, [0.5, 0.5])


def test_pure_equilibrium_with_lowest_indices_wins():
    payoffs = np.array([[1.0, 0.0], [0.0, 1.0]])
    profile = brute_force_equilibrium(BimatrixGame(payoffs, payoffs))
    assert profile.row_strategy.tolist() == [1.0, 0.0]
    assert profile.col_strategy.tolist() == [1.0, 0.0]


@pytest.mark.parametrize("k", [3, 4])
def test_random_games_have_exact_equilibria(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(25):
        game = BimatrixGame(rng.random((k, k)), rng.random((k, k)))
        report = exact_regret(game, brute_force_equilibrium(game))
        assert report.max_regret <= 1e-6


def test_large_games_are_rejected():
    with pytest.raises(ValueError):
        brute_force_equilibrium(BimatrixGame(np.zeros((7, 7)), np.zeros((7, 7))))


def test_zero_sum_value():
    d = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert zero_sum_value(BimatrixGame(d, -d, SIGNED_RANGE)) == pytest.approx(0.0, abs=1e-12)

    skewed = np.array([[0.5, 0.5], [-1.0, 1.0]])
    assert zero_sum_value(BimatrixGame(skewed, -skewed, SIGNED_RANGE)) == pytest.approx(0.5)


def test_zero_sum_value_requires_zero_sum_game():
    with pytest.raises(ValueError):
        zero_sum_value(BimatrixGame(np.ones((2, 2)), np.ones((2, 2))))
