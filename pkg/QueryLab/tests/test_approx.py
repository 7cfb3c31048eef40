from pathlib import Path
import sys

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[2]
PACKAGE_ROOT = PROJECT_ROOT / "QueryLab"
if str(PACKAGE_ROOT) not in sys.path:
    sys.path.insert(0, str(PACKAGE_ROOT))

from querylab import approx
from querylab.approx import (
    ALPHA,
    BbmBranch,
    KsBranch,
    KsMode,
    LemmaHypothesisError,
    Orientation,
    RoleView,
    bbm_query_ne,
    choose_orientation,
    ks_parameters,
    ks_query_wsne,
    lemma_twoz_locate,
    shift_weight,
    swap_roles,
)
from querylab.experiments import generate_game
from querylab.games import (
    SIGNED_RANGE,
    BimatrixGame,
    MixedProfile,
    derived_d_x,
    exact_regret,
    is_eps_ne,
    is_eps_wsne,
)
from querylab.oracle import BudgetExhaustedError, MatrixOracle, budgeted
from querylab.support_enumeration import DegenerateGameError, brute_force_equilibrium
from querylab.zerosum import (
    ApproxPayoffVector,
    MwuConfig,
    Player,
    ZeroSumWsneResult,
    derive_seed,
    sample_count,
)


def _fixed_zero_sum_stage(monkeypatch, profile: MixedProfile) -> None:
    """Replace the difference-game solver with one returning ``profile`` for free."""

    monkeypatch.setattr(approx, "mwu_zero_sum", lambda oracle, k, config: profile)


def test_alpha_value():
    assert ALPHA == pytest.approx(0.3819660112501051, abs=1e-12)


def test_shift_weight_is_decreasing():
    assert shift_weight(0.5) == pytest.approx(1.0 / 3.0)
    assert shift_weight(0.0) == 0.5
    assert shift_weight(1.0) == 0.0
    grid = [shift_weight(g) for g in np.linspace(0.0, 1.0, 101)]
    assert all(a > b for a, b in zip(grid, grid[1:]))


def test_orientation_swaps_only_on_strictly_larger_column_regret():
    assert choose_orientation(0.2, 0.3) is Orientation.SWAPPED
    assert choose_orientation(0.3, 0.3) is Orientation.DIRECT
    assert choose_orientation(0.4, 0.1) is Orientation.DIRECT


def test_swap_roles_is_an_involution():
    view = RoleView(
        orientation=Orientation.DIRECT,
        leader_strategy=np.array([1.0, 0.0]),
        follower_strategy=np.array([0.25, 0.75]),
        leader_vector=ApproxPayoffVector.exact(np.array([0.1, 0.2]), Player.ROW),
        follower_vector=ApproxPayoffVector.exact(np.array([0.3, 0.4]), Player.COLUMN),
    )
    swapped = swap_roles(view)
    back = swap_roles(swapped)

    assert swapped.orientation is Orientation.SWAPPED
    assert swapped.profile().same_as(view.profile())
    assert back.orientation is Orientation.DIRECT
    assert back.leader_vector is view.leader_vector


def test_bbm_on_constant_game_stays_low_regret():
    k, eps = 5, 0.5
    game = BimatrixGame(np.ones((k, k)), np.ones((k, k)))
    oracle = MatrixOracle(game, keep_log=False)

    outcome = bbm_query_ne(oracle, k, eps, seed=3)

    rounds = MwuConfig.for_accuracy(k, eps / 4).rounds
    assert outcome.branch is BbmBranch.LOW_REGRET
    assert outcome.delta is None
    assert outcome.g == pytest.approx(0.0, abs=1e-12)
    assert outcome.queries == 2 * k * rounds + 2 * k * sample_count(k, eps / 4) + k
    assert outcome.queries == oracle.ledger.total_count
    assert exact_regret(game, outcome.profile).max_regret == pytest.approx(0.0, abs=1e-12)


def test_bbm_shifts_when_leader_regret_is_large(monkeypatch):
    game = BimatrixGame([[1.0, 0.0], [0.0, 0.0]], np.zeros((2, 2)))
    _fixed_zero_sum_stage(monkeypatch, MixedProfile([0.5, 0.5], [1.0, 0.0]))

    outcome = bbm_query_ne(MatrixOracle(game), 2, 0.2, seed=0)

    assert outcome.branch is BbmBranch.SHIFTED
    assert outcome.orientation is Orientation.DIRECT
    assert outcome.g == pytest.approx(0.5)
    assert outcome.delta == pytest.approx(1.0 / 3.0)
    assert (outcome.b, outcome.d) == (0, 0)
    assert outcome.profile.row_strategy.tolist() == [1.0, 0.0]
    assert np.allclose(outcome.profile.col_strategy, [1.0, 0.0])
    assert is_eps_ne(game, outcome.profile, ALPHA + 0.2)


def test_bbm_swaps_roles_for_column_leader(monkeypatch):
    game = BimatrixGame(np.zeros((2, 2)), [[1.0, 0.0], [0.0, 0.0]])
    _fixed_zero_sum_stage(monkeypatch, MixedProfile([1.0, 0.0], [0.5, 0.5]))

    oracle = MatrixOracle(game)
    outcome = bbm_query_ne(oracle, 2, 0.2, seed=0)

    assert outcome.orientation is Orientation.SWAPPED
    assert outcome.branch is BbmBranch.SHIFTED
    assert outcome.profile.col_strategy.tolist() == [1.0, 0.0]
    assert np.allclose(outcome.profile.row_strategy, [1.0, 0.0])
    assert oracle.ledger.column_counts[0] >= 2


def test_bbm_random_games_meet_guarantee():
    k, eps = 30, 0.3
    successes = 0
    for trial in range(10):
        game = generate_game("uniform", k, derive_seed(5, trial))
        outcome = bbm_query_ne(MatrixOracle(game, keep_log=False), k, eps, seed=trial)
        if outcome.branch is BbmBranch.SHIFTED:
            assert outcome.delta == pytest.approx(shift_weight(outcome.g))
            assert outcome.g > ALPHA
            leader = (
                outcome.profile.row_strategy
                if outcome.orientation is Orientation.DIRECT
                else outcome.profile.col_strategy
            )
            assert leader[outcome.b] == 1.0
        successes += is_eps_ne(game, outcome.profile, ALPHA + eps)
    assert successes >= 8


@pytest.mark.slow
def test_bbm_random_games_k100():
    k, eps = 100, 0.1
    successes = 0
    for trial in range(10):
        game = generate_game("uniform", k, derive_seed(6, trial))
        outcome = bbm_query_ne(MatrixOracle(game, keep_log=False), k, eps, seed=trial)
        successes += is_eps_ne(game, outcome.profile, ALPHA + eps)
    assert successes >= 8


def test_bbm_reports_budget_exhaustion():
    game = generate_game("uniform", 8, 1)
    with pytest.raises(BudgetExhaustedError) as excinfo:
        bbm_query_ne(budgeted(MatrixOracle(game), 50), 8, 0.3, seed=0)
    assert excinfo.value.partial_profile is not None


def test_bbm_rejects_eps_outside_open_unit_interval():
    oracle = MatrixOracle(generate_game("uniform", 3, 0))
    with pytest.raises(ValueError):
        bbm_query_ne(oracle, 3, 1.0, seed=0)
    assert oracle.ledger.total_count == 0


def test_ks_parameters():
    z, threshold = ks_parameters(KsMode.GENERAL, 0.15)
    assert z == pytest.approx(2.0 / 3.0)
    assert threshold == pytest.approx(2.0 / 3.0 - 0.03)
    z, threshold = ks_parameters(KsMode.ZERO_ONE, 0.1)
    assert z == pytest.approx(0.6)
    assert threshold == pytest.approx(0.58)


def test_lemma_locates_highest_payoff_sum():
    row = np.array([[0.05, 0.75, 0.45], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    oracle = MatrixOracle(BimatrixGame(row, row))

    assert lemma_twoz_locate(oracle, 0, 3, 2.0 / 3.0, 0.1) == 1
    assert oracle.ledger.total_count == 3


def test_lemma_scans_columns_for_column_player():
    col = np.array([[0.0, 1.0], [0.0, 0.0]])
    row = np.array([[0.0, 0.25], [0.0, 1.0]])
    oracle = MatrixOracle(BimatrixGame(row, col))

    assert lemma_twoz_locate(oracle, 1, 2, 0.55, 0.1, Player.COLUMN) == 0
    assert oracle.ledger.column_counts.tolist() == [0, 2]


def test_lemma_raises_when_hypothesis_fails():
    oracle = MatrixOracle(BimatrixGame(np.full((3, 3), 0.5), np.full((3, 3), 0.5)))
    with pytest.raises(LemmaHypothesisError):
        lemma_twoz_locate(oracle, 2, 3, 2.0 / 3.0, 0.1)


def test_ks_keeps_mixed_profile_when_supports_are_balanced():
    payoffs = np.array([[0.2, 0.4, 0.6], [0.6, 0.4, 0.2], [0.4, 0.4, 0.4]])
    game = BimatrixGame(payoffs, payoffs)
    oracle = MatrixOracle(game, keep_log=False)

    outcome = ks_query_wsne(oracle, 3, 0.3, seed=1, rounds_constant=1e-6)

    assert outcome.branch is KsBranch.MIXED_FROM_ZERO_SUM
    assert outcome.pure_cell is None
    assert outcome.queries == oracle.ledger.total_count
    assert exact_regret(game, outcome.profile).max_wsne_violation == pytest.approx(0.0, abs=1e-9)


def test_ks_falls_back_to_pure_cell():
    payoffs = np.zeros((3, 3))
    payoffs[0, :] = 1.0
    game = BimatrixGame(payoffs, payoffs)

    outcome = ks_query_wsne(MatrixOracle(game), 3, 0.3, seed=2, rounds_constant=1e-6)

    assert outcome.branch is KsBranch.PURE_FROM_LEMMA
    assert outcome.pure_cell == (0, 0)
    assert is_eps_wsne(game, outcome.profile, 0.0)


def test_ks_zero_one_mode_returns_exact_pure_equilibrium():
    payoffs = np.zeros((3, 3))
    payoffs[0, :] = 1.0
    game = BimatrixGame(payoffs, payoffs)

    outcome = ks_query_wsne(
        MatrixOracle(game), 3, 0.3, seed=2, mode=KsMode.ZERO_ONE, rounds_constant=1e-6
    )

    assert outcome.mode is KsMode.ZERO_ONE
    assert outcome.z == pytest.approx(0.8)
    assert outcome.branch is KsBranch.PURE_FROM_LEMMA
    assert game.cell(*outcome.pure_cell) == (1.0, 1.0)
    assert exact_regret(game, outcome.profile).max_regret == 0.0


def test_ks_zero_one_coordination_game_pure_branch(monkeypatch):
    game = BimatrixGame(np.eye(3), np.eye(3))
    stage = ZeroSumWsneResult(
        profile=MixedProfile(np.full(3, 1.0 / 3.0), [1.0, 0.0, 0.0]),
        equilibrium=MixedProfile.uniform(3),
        row_vector=ApproxPayoffVector.exact(np.zeros(3), Player.ROW),
        col_vector=ApproxPayoffVector.exact(np.zeros(3), Player.COLUMN),
        queries=0,
    )
    monkeypatch.setattr(approx, "zerosum_wsne", lambda *args, **kwargs: stage)

    outcome = ks_query_wsne(MatrixOracle(game), 3, 0.2, seed=0, mode=KsMode.ZERO_ONE)

    assert outcome.branch is KsBranch.PURE_FROM_LEMMA
    assert outcome.pure_cell == (0, 0)
    assert exact_regret(game, outcome.profile).max_regret == 0.0


def _exact_zero_sum_stage(monkeypatch, game: BimatrixGame) -> None:
    """Replace the zero-sum stage of KS by an exact equilibrium of (D, -D)."""

    d, _ = derived_d_x(game)
    equilibrium = brute_force_equilibrium(BimatrixGame(d, -d, SIGNED_RANGE))
    x, y = equilibrium.row_strategy, equilibrium.col_strategy
    stage = ZeroSumWsneResult(
        profile=equilibrium,
        equilibrium=equilibrium,
        row_vector=ApproxPayoffVector.exact(d @ y, Player.ROW),
        col_vector=ApproxPayoffVector.exact(-(x @ d), Player.COLUMN),
        queries=0,
    )
    monkeypatch.setattr(approx, "zerosum_wsne", lambda *args, **kwargs: stage)


def test_ks_zero_one_pure_branch_is_always_an_exact_equilibrium(monkeypatch):
    k, eps = 4, 0.1
    branches = {KsBranch.PURE_FROM_LEMMA: 0, KsBranch.MIXED_FROM_ZERO_SUM: 0}
    for trial in range(80):
        rng = np.random.default_rng(derive_seed(21, trial))
        game = BimatrixGame(
            rng.integers(0, 2, size=(k, k)).astype(float),
            rng.integers(0, 2, size=(k, k)).astype(float),
        )
        try:
            _exact_zero_sum_stage(monkeypatch, game)
        except DegenerateGameError:
            continue

        outcome = ks_query_wsne(
            MatrixOracle(game, keep_log=False), k, eps, seed=trial, mode=KsMode.ZERO_ONE
        )

        branches[outcome.branch] += 1
        report = exact_regret(game, outcome.profile)
        if outcome.branch is KsBranch.PURE_FROM_LEMMA:
            assert game.cell(*outcome.pure_cell) == (1.0, 1.0)
            assert report.max_regret == 0.0
        assert report.max_wsne_violation <= 0.5 + eps + 1e-9

    assert branches[KsBranch.PURE_FROM_LEMMA] >= 1
    assert sum(branches.values()) >= 20


def test_ks_general_mode_meets_guarantee_on_random_games(monkeypatch):
    k, eps = 5, 0.15
    for trial in range(40):
        rng = np.random.default_rng(derive_seed(5, trial))
        game = BimatrixGame(rng.random((k, k)), rng.random((k, k)))
        _exact_zero_sum_stage(monkeypatch, game)

        outcome = ks_query_wsne(MatrixOracle(game, keep_log=False), k, eps, seed=trial)

        assert is_eps_wsne(game, outcome.profile, 2.0 / 3.0 + eps)


def test_ks_rejects_eps_outside_open_unit_interval():
    oracle = MatrixOracle(generate_game("uniform", 3, 0))
    with pytest.raises(ValueError):
        ks_query_wsne(oracle, 3, 0.0, seed=0)


def test_ks_query_count_on_pure_branch():
    k, eps = 3, 0.3
    payoffs = np.zeros((k, k))
    payoffs[0, :] = 1.0
    oracle = MatrixOracle(BimatrixGame(payoffs, payoffs), keep_log=False)

    outcome = ks_query_wsne(oracle, k, eps, seed=4, rounds_constant=1e-6)

    inner = (eps / 10) ** 2 / 24
    rounds = MwuConfig.for_accuracy(k, inner, rounds_constant=1e-6).rounds
    expected = (
        2 * k * rounds
        + 2 * k * sample_count(k, inner)
        + 2 * k * sample_count(k, eps / 10)
        + k
    )
    assert outcome.queries == expected
