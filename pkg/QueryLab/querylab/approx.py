"""Approximate equilibria of general games built on the zero-sum solver.

``bbm_query_ne`` reaches a ((3 − √5)/2 + eps)-NE by solving the difference
game (R − C, C − R) and, when the leading player's regret is large, mixing
the follower toward its best response against a pure strategy.

``ks_query_wsne`` reaches a (2/3 + eps)-WSNE (or (1/2 + eps) on zero-one
games) from a WSNE of (D, −D) with D = ½(R − C), falling back to a single
pure cell whose payoff sum is high.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .games import MixedProfile
from .oracle import (
    PayoffOracle,
    RunFailure,
    difference_oracle,
    expect,
    half_difference_oracle,
)
from .zerosum import (
    DEFAULT_ROUNDS_CONSTANT,
    ApproxPayoffVector,
    MwuConfig,
    Player,
    approx_best_response,
    approx_regret,
    derive_seed,
    estimate_payoff_vector,
    mwu_zero_sum,
    zerosum_wsne,
)

LOGGER = logging.getLogger(__name__)

__all__ = [
    "ALPHA",
    "GENERAL_Z",
    "LemmaHypothesisError",
    "BbmBranch",
    "Orientation",
    "RoleView",
    "BbmOutcome",
    "KsMode",
    "KsBranch",
    "KsOutcome",
    "shift_weight",
    "choose_orientation",
    "role_view",
    "swap_roles",
    "bbm_query_ne",
    "ks_parameters",
    "lemma_twoz_locate",
    "ks_query_wsne",
]

ALPHA = (3.0 - math.sqrt(5.0)) / 2.0
GENERAL_Z = 2.0 / 3.0


class LemmaHypothesisError(RunFailure):
    """The located row or column held no cell with payoff sum above 2z − eps."""


class BbmBranch(str, Enum):
    LOW_REGRET = "low-regret"
    SHIFTED = "shifted"


class Orientation(str, Enum):
    """Which player leads the second stage: the row player, or the column player after a swap."""

    DIRECT = "direct"
    SWAPPED = "swapped"

    def flipped(self) -> "Orientation":
        return Orientation.SWAPPED if self is Orientation.DIRECT else Orientation.DIRECT


@dataclass(frozen=True, eq=False)
class RoleView:
    """The profile and payoff vectors seen from the leading player's side."""

    orientation: Orientation
    leader_strategy: np.ndarray
    follower_strategy: np.ndarray
    leader_vector: ApproxPayoffVector
    follower_vector: ApproxPayoffVector

    def profile(
        self,
        leader: Optional[np.ndarray] = None,
        follower: Optional[np.ndarray] = None,
    ) -> MixedProfile:
        lead = self.leader_strategy if leader is None else leader
        follow = self.follower_strategy if follower is None else follower
        if self.orientation is Orientation.DIRECT:
            return MixedProfile(lead, follow)
        return MixedProfile(follow, lead)


def swap_roles(view: RoleView) -> RoleView:
    return RoleView(
        orientation=view.orientation.flipped(),
        leader_strategy=view.follower_strategy,
        follower_strategy=view.leader_strategy,
        leader_vector=view.follower_vector,
        follower_vector=view.leader_vector,
    )


def choose_orientation(row_regret: float, col_regret: float) -> Orientation:
    """Swap only when the column player's regret is strictly larger."""

    return Orientation.SWAPPED if col_regret > row_regret else Orientation.DIRECT


def role_view(
    profile: MixedProfile, row_vector: ApproxPayoffVector, col_vector: ApproxPayoffVector
) -> RoleView:
    view = RoleView(
        orientation=Orientation.DIRECT,
        leader_strategy=profile.row_strategy,
        follower_strategy=profile.col_strategy,
        leader_vector=row_vector,
        follower_vector=col_vector,
    )
    orientation = choose_orientation(
        approx_regret(row_vector, profile.row_strategy),
        approx_regret(col_vector, profile.col_strategy),
    )
    return view if orientation is Orientation.DIRECT else swap_roles(view)


def shift_weight(g: float) -> float:
    """δ = (1 − g)/(2 − g), decreasing in g on [0, 1]."""

    return (1.0 - g) / (2.0 - g)


@dataclass(frozen=True)
class BbmOutcome:
    profile: MixedProfile
    branch: BbmBranch
    g: float
    b: int
    d: int
    delta: Optional[float]
    alpha: float
    queries: int
    orientation: Orientation

    def to_dict(self) -> dict:
        return {
            "branch": self.branch.value,
            "g": self.g,
            "b": self.b,
            "d": self.d,
            "delta": self.delta,
            "alpha": self.alpha,
            "queries": self.queries,
            "orientation": self.orientation.value,
            "profile": self.profile.to_dict(),
        }


def _check_open_unit(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _estimate_both(
    oracle: PayoffOracle, profile: MixedProfile, eps: float, seed: int
) -> Tuple[ApproxPayoffVector, ApproxPayoffVector]:
    try:
        row_vector = estimate_payoff_vector(
            oracle, profile.col_strategy, Player.ROW, eps, derive_seed(seed, 1)
        )
        col_vector = estimate_payoff_vector(
            oracle, profile.row_strategy, Player.COLUMN, eps, derive_seed(seed, 2)
        )
    except RunFailure as exc:
        raise exc.with_profile(profile)
    return row_vector, col_vector


def _follower_line(oracle: PayoffOracle, view: RoleView, b: int) -> np.ndarray:
    """Follower payoffs against the leader's pure strategy ``b`` (k queries)."""

    if view.orientation is Orientation.DIRECT:
        return expect(oracle.query_row(b)).col_payoffs
    return expect(oracle.query_column(b)).row_payoffs


def bbm_query_ne(
    oracle: PayoffOracle,
    k: int,
    eps: float,
    seed: int,
    *,
    rounds_constant: float = DEFAULT_ROUNDS_CONSTANT,
) -> BbmOutcome:
    """A ((3 − √5)/2 + eps)-NE of a game with payoffs in [0, 1]."""

    _check_open_unit(eps)
    if oracle.k != k:
        raise ValueError(f"oracle serves a {oracle.k}x{oracle.k} game, expected k={k}")
    start = oracle.ledger.total_count

    config = MwuConfig.for_accuracy(k, eps / 4.0, derive_seed(seed, 0), rounds_constant)
    profile = mwu_zero_sum(difference_oracle(oracle), k, config)
    row_vector, col_vector = _estimate_both(oracle, profile, eps / 4.0, seed)

    view = role_view(profile, row_vector, col_vector)
    g = approx_regret(view.leader_vector, view.leader_strategy)
    b = approx_best_response(view.leader_vector)
    try:
        d = int(np.argmax(_follower_line(oracle, view, b)))
    except RunFailure as exc:
        raise exc.with_profile(profile)

    if g <= ALPHA:
        branch = BbmBranch.LOW_REGRET
        delta: Optional[float] = None
        result = profile
    else:
        branch = BbmBranch.SHIFTED
        delta = shift_weight(g)
        leader = np.zeros(k)
        leader[b] = 1.0
        follower = (1.0 - delta) * view.follower_strategy
        follower[d] += delta
        result = view.profile(leader, follower)

    queries = oracle.ledger.total_count - start
    LOGGER.debug(
        "bbm: branch=%s g=%.4f b=%d d=%d orientation=%s queries=%d",
        branch.value,
        g,
        b,
        d,
        view.orientation.value,
        queries,
    )
    return BbmOutcome(
        profile=result,
        branch=branch,
        g=g,
        b=b,
        d=d,
        delta=delta,
        alpha=ALPHA,
        queries=queries,
        orientation=view.orientation,
    )


class KsMode(str, Enum):
    GENERAL = "general"
    ZERO_ONE = "zero-one"


class KsBranch(str, Enum):
    MIXED_FROM_ZERO_SUM = "mixed-from-zero-sum"
    PURE_FROM_LEMMA = "pure-from-lemma"


@dataclass(frozen=True)
class KsOutcome:
    profile: MixedProfile
    branch: KsBranch
    pure_cell: Optional[Tuple[int, int]]
    z: float
    queries: int
    mode: KsMode = KsMode.GENERAL

    def to_dict(self) -> dict:
        return {
            "branch": self.branch.value,
            "pure_cell": list(self.pure_cell) if self.pure_cell is not None else None,
            "z": self.z,
            "queries": self.queries,
            "mode": self.mode.value,
            "profile": self.profile.to_dict(),
        }


def ks_parameters(mode: KsMode, eps: float) -> Tuple[float, float]:
    """``(z, threshold)``; the gap check fails when a payoff beats a support payoff by more than threshold."""

    z = GENERAL_Z if KsMode(mode) is KsMode.GENERAL else 0.5 + eps
    return z, z - eps / 5.0


def lemma_twoz_locate(
    oracle: PayoffOracle,
    index: int,
    k: int,
    z: float,
    eps: float,
    player: Player = Player.ROW,
) -> int:
    """Scan row ``index`` (or column, for ``Player.COLUMN``) for the largest R + C.

    Costs exactly k queries and returns the lowest index attaining the
    maximum. Raises :class:`LemmaHypothesisError` unless that sum exceeds
    2z − eps.
    """

    if oracle.k != k:
        raise ValueError(f"oracle serves a {oracle.k}x{oracle.k} game, expected k={k}")
    if Player(player) is Player.ROW:
        answers = expect(oracle.query_row(index))
    else:
        answers = expect(oracle.query_column(index))
    sums = answers.row_payoffs + answers.col_payoffs
    best = int(np.argmax(sums))
    if not sums[best] > 2.0 * z - eps:
        raise LemmaHypothesisError(
            f"{Player(player).value} {index}: best payoff sum {sums[best]:.6g} "
            f"does not exceed 2z - eps = {2.0 * z - eps:.6g}"
        )
    return best


def _gap_witness(
    vector: ApproxPayoffVector, support: np.ndarray, threshold: float
) -> Optional[int]:
    """Index of the best strategy if it beats the worst supported one by more than threshold."""

    best = approx_best_response(vector)
    worst = float(vector.values[support].min())
    if vector.values[best] > worst + threshold:
        return best
    return None


def ks_query_wsne(
    oracle: PayoffOracle,
    k: int,
    eps: float,
    seed: int,
    mode: KsMode = KsMode.GENERAL,
    *,
    rounds_constant: float = DEFAULT_ROUNDS_CONSTANT,
) -> KsOutcome:
    """A (2/3 + eps)-WSNE, or a (1/2 + eps)-WSNE of a zero-one game in ``KsMode.ZERO_ONE``."""

    _check_open_unit(eps)
    mode = KsMode(mode)
    if oracle.k != k:
        raise ValueError(f"oracle serves a {oracle.k}x{oracle.k} game, expected k={k}")
    start = oracle.ledger.total_count
    z, threshold = ks_parameters(mode, eps)
    accuracy = eps / 10.0

    stage = zerosum_wsne(
        half_difference_oracle(oracle),
        k,
        accuracy,
        derive_seed(seed, 0),
        rounds_constant=rounds_constant,
    )
    profile = stage.profile
    row_vector, col_vector = _estimate_both(oracle, profile, accuracy, seed)

    pure_cell: Optional[Tuple[int, int]] = None
    try:
        row = _gap_witness(row_vector, profile.row_support(), threshold)
        if row is not None:
            pure_cell = (row, lemma_twoz_locate(oracle, row, k, z, eps, Player.ROW))
        else:
            col = _gap_witness(col_vector, profile.col_support(), threshold)
            if col is not None:
                pure_cell = (lemma_twoz_locate(oracle, col, k, z, eps, Player.COLUMN), col)
    except RunFailure as exc:
        raise exc.with_profile(profile)

    if pure_cell is None:
        branch = KsBranch.MIXED_FROM_ZERO_SUM
        result = profile
    else:
        branch = KsBranch.PURE_FROM_LEMMA
        result = MixedProfile.pure(k, *pure_cell)
        if mode is KsMode.ZERO_ONE:
            answer = oracle.ledger.answer(*pure_cell)
            if answer is None or answer.a != 1.0 or answer.b != 1.0:
                raise LemmaHypothesisError(
                    f"cell {pure_cell} is not a (1, 1) cell; is the game zero-one?",
                    partial_profile=profile,
                )

    queries = oracle.ledger.total_count - start
    LOGGER.debug("ks[%s]: branch=%s cell=%s queries=%d", mode.value, branch.value, pure_cell, queries)
    return KsOutcome(
        profile=result,
        branch=branch,
        pure_cell=pure_cell,
        z=z,
        queries=queries,
        mode=mode,
    )
