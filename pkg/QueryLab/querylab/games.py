"""Exact bimatrix games, mixed profiles and the regret-based equilibrium checks.

Everything in this module sees full payoff matrices. It is used to generate
games and to verify profiles, never by the query algorithms themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "PROBABILITY_TOLERANCE",
    "REGRET_TOLERANCE",
    "PayoffRange",
    "UNIT_RANGE",
    "SIGNED_RANGE",
    "BimatrixGame",
    "MixedProfile",
    "RegretReport",
    "exact_regret",
    "is_eps_ne",
    "is_eps_wsne",
    "derived_zero_sum",
    "derived_d_x",
    "parse_game",
    "load_game",
    "save_game",
    "load_profile",
    "save_profile",
]

PROBABILITY_TOLERANCE = 1e-9
REGRET_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PayoffRange:
    """Declared payoff interval of a game."""

    low: float
    high: float

    @property
    def width(self) -> float:
        return self.high - self.low

    def contains(self, values: np.ndarray) -> bool:
        return bool(np.all(values >= self.low) and np.all(values <= self.high))

    def to_dict(self) -> Dict[str, float]:
        return {"low": self.low, "high": self.high}


UNIT_RANGE = PayoffRange(0.0, 1.0)
SIGNED_RANGE = PayoffRange(-1.0, 1.0)
_KNOWN_RANGES = (UNIT_RANGE, SIGNED_RANGE)


def _as_matrix(values: object, name: str) -> np.ndarray:
    matrix = np.array(values, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{name} contains non-finite entries")
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class BimatrixGame:
    """A k×k game: row-player payoffs, column-player payoffs, declared range."""

    row_payoffs: np.ndarray
    col_payoffs: np.ndarray
    payoff_range: PayoffRange = UNIT_RANGE

    def __post_init__(self) -> None:
        row = _as_matrix(self.row_payoffs, "row_payoffs")
        col = _as_matrix(self.col_payoffs, "col_payoffs")
        if row.shape != col.shape:
            raise ValueError(
                f"payoff matrices differ in shape: {row.shape} vs {col.shape}"
            )
        if self.payoff_range not in _KNOWN_RANGES:
            raise ValueError(f"unsupported payoff range {self.payoff_range}")
        if not (self.payoff_range.contains(row) and self.payoff_range.contains(col)):
            raise ValueError(
                "payoffs outside the declared range "
                f"[{self.payoff_range.low:g}, {self.payoff_range.high:g}]"
            )
        object.__setattr__(self, "row_payoffs", row)
        object.__setattr__(self, "col_payoffs", col)

    @property
    def k(self) -> int:
        return int(self.row_payoffs.shape[0])

    @property
    def is_zero_one(self) -> bool:
        entries = np.concatenate([self.row_payoffs.ravel(), self.col_payoffs.ravel()])
        return bool(np.all((entries == 0.0) | (entries == 1.0)))

    @property
    def constant_sum(self) -> Optional[float]:
        """The constant c with R + C ≡ c, or None if the sum varies."""

        total = self.row_payoffs + self.col_payoffs
        value = float(total[0, 0])
        if np.all(np.abs(total - value) <= REGRET_TOLERANCE):
            return value
        return None

    @property
    def is_zero_sum(self) -> bool:
        value = self.constant_sum
        return value is not None and abs(value) <= REGRET_TOLERANCE

    def cell(self, i: int, j: int) -> Tuple[float, float]:
        return float(self.row_payoffs[i, j]), float(self.col_payoffs[i, j])

    def payoffs(self, profile: "MixedProfile") -> Tuple[float, float]:
        """Expected payoffs (row, column) when ``profile`` is played."""

        _check_dimensions(self, profile)
        x, y = profile.row_strategy, profile.col_strategy
        return float(x @ self.row_payoffs @ y), float(x @ self.col_payoffs @ y)

    def to_dict(self) -> Dict[str, object]:
        return {
            "k": self.k,
            "range": self.payoff_range.to_dict(),
            "row_payoffs": self.row_payoffs.tolist(),
            "col_payoffs": self.col_payoffs.tolist(),
        }


def _as_distribution(values: object, name: str) -> np.ndarray:
    vector = np.array(values, dtype=float)
    if vector.ndim != 1 or vector.size < 1:
        raise ValueError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(vector)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(vector < 0):
        raise ValueError(f"{name} has negative probabilities")
    if abs(float(vector.sum()) - 1.0) > PROBABILITY_TOLERANCE:
        raise ValueError(f"{name} sums to {vector.sum()!r}, expected 1")
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class MixedProfile:
    """Mixed strategies of both players."""

    row_strategy: np.ndarray
    col_strategy: np.ndarray

    def __post_init__(self) -> None:
        x = _as_distribution(self.row_strategy, "row_strategy")
        y = _as_distribution(self.col_strategy, "col_strategy")
        object.__setattr__(self, "row_strategy", x)
        object.__setattr__(self, "col_strategy", y)

    @classmethod
    def pure(cls, k: int, row: int, col: int) -> "MixedProfile":
        x = np.zeros(k)
        y = np.zeros(k)
        x[row] = 1.0
        y[col] = 1.0
        return cls(x, y)

    @classmethod
    def uniform(cls, k: int) -> "MixedProfile":
        return cls(np.full(k, 1.0 / k), np.full(k, 1.0 / k))

    @property
    def k(self) -> int:
        return int(self.row_strategy.size)

    def row_support(self) -> np.ndarray:
        return np.flatnonzero(self.row_strategy > 0)

    def col_support(self) -> np.ndarray:
        return np.flatnonzero(self.col_strategy > 0)

    def same_as(self, other: "MixedProfile") -> bool:
        return bool(
            np.array_equal(self.row_strategy, other.row_strategy)
            and np.array_equal(self.col_strategy, other.col_strategy)
        )

    def to_dict(self) -> Dict[str, List[float]]:
        return {
            "row_strategy": self.row_strategy.tolist(),
            "col_strategy": self.col_strategy.tolist(),
        }


@dataclass(frozen=True)
class RegretReport:
    """Exact regrets and well-supported violations of a profile."""

    row_regret: float
    col_regret: float
    row_best_response_payoff: float
    col_best_response_payoff: float
    row_wsne_violation: float
    col_wsne_violation: float

    @property
    def max_regret(self) -> float:
        return max(self.row_regret, self.col_regret)

    @property
    def max_wsne_violation(self) -> float:
        return max(self.row_wsne_violation, self.col_wsne_violation)

    def to_dict(self) -> Dict[str, float]:
        return {
            "row_regret": self.row_regret,
            "col_regret": self.col_regret,
            "row_best_response_payoff": self.row_best_response_payoff,
            "col_best_response_payoff": self.col_best_response_payoff,
            "row_wsne_violation": self.row_wsne_violation,
            "col_wsne_violation": self.col_wsne_violation,
        }


def _check_dimensions(game: BimatrixGame, profile: MixedProfile) -> None:
    if profile.k != game.k or profile.col_strategy.size != game.k:
        raise ValueError(
            f"profile of dimension {profile.k} does not fit a {game.k}x{game.k} game"
        )


def exact_regret(game: BimatrixGame, profile: MixedProfile) -> RegretReport:
    _check_dimensions(game, profile)
    x, y = profile.row_strategy, profile.col_strategy

    row_values = game.row_payoffs @ y
    col_values = x @ game.col_payoffs
    row_best = float(row_values.max())
    col_best = float(col_values.max())

    row_support = row_values[x > 0]
    col_support = col_values[y > 0]

    return RegretReport(
        row_regret=row_best - float(x @ row_values),
        col_regret=col_best - float(col_values @ y),
        row_best_response_payoff=row_best,
        col_best_response_payoff=col_best,
        row_wsne_violation=row_best - float(row_support.min()),
        col_wsne_violation=col_best - float(col_support.min()),
    )


def _check_eps(game: BimatrixGame, eps: float) -> None:
    if not 0.0 <= eps <= game.payoff_range.width:
        raise ValueError(
            f"eps={eps!r} outside [0, {game.payoff_range.width:g}] for this payoff range"
        )


def is_eps_ne(game: BimatrixGame, profile: MixedProfile, eps: float) -> bool:
    _check_eps(game, eps)
    return exact_regret(game, profile).max_regret <= eps + REGRET_TOLERANCE


def is_eps_wsne(game: BimatrixGame, profile: MixedProfile, eps: float) -> bool:
    _check_eps(game, eps)
    return exact_regret(game, profile).max_wsne_violation <= eps + REGRET_TOLERANCE


def _require_unit_range(game: BimatrixGame) -> None:
    if game.payoff_range != UNIT_RANGE:
        raise ValueError("derived games are only defined for payoffs in [0, 1]")


def derived_zero_sum(game: BimatrixGame) -> BimatrixGame:
    """The zero-sum game (R − C, C − R) with payoffs in [−1, 1]."""

    _require_unit_range(game)
    difference = game.row_payoffs - game.col_payoffs
    return BimatrixGame(difference, -difference, SIGNED_RANGE)


def derived_d_x(game: BimatrixGame) -> Tuple[np.ndarray, np.ndarray]:
    """D = ½(R − C) and X = −½(R + C); D = R + X holds entrywise."""

    _require_unit_range(game)
    d = 0.5 * (game.row_payoffs - game.col_payoffs)
    x = -0.5 * (game.row_payoffs + game.col_payoffs)
    return d, x


# -- files ---------------------------------------------------------------------


def _format_value(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return format(float(value), ".17g")


def _format_matrix(matrix: np.ndarray) -> List[str]:
    return [" ".join(_format_value(value) for value in row) for row in matrix]


def save_game(
    game: BimatrixGame,
    path: Path,
    *,
    hidden_column: Optional[int] = None,
) -> Path:
    """Write ``game`` in the plain-text game format.

    A ``hidden <c>`` sidecar line is appended for sampled hidden-column
    instances.
    """

    lines = [
        f"k {game.k} range {_format_value(game.payoff_range.low)} "
        f"{_format_value(game.payoff_range.high)}"
    ]
    lines.extend(_format_matrix(game.row_payoffs))
    lines.append("")
    lines.extend(_format_matrix(game.col_payoffs))
    if hidden_column is not None:
        lines.append(f"hidden {hidden_column}")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _parse_rows(lines: Sequence[str], k: int, name: str) -> np.ndarray:
    if len(lines) != k:
        raise ValueError(f"{name}: expected {k} rows, found {len(lines)}")
    rows = []
    for number, line in enumerate(lines, start=1):
        try:
            values = [float(token) for token in line.split()]
        except ValueError as exc:
            raise ValueError(f"{name}: row {number} is not numeric") from exc
        if len(values) != k:
            raise ValueError(f"{name}: row {number} has {len(values)} entries, expected {k}")
        rows.append(values)
    return np.array(rows, dtype=float)


def parse_game(text: str) -> Tuple[BimatrixGame, Optional[int]]:
    """Parse the game file format; returns the game and the optional hidden column."""

    lines = [line.strip() for line in text.strip().splitlines()]
    if not lines:
        raise ValueError("empty game file")

    header = lines[0].split()
    if len(header) != 5 or header[0] != "k" or header[2] != "range":
        raise ValueError(f"malformed header line: {lines[0]!r}")
    try:
        k = int(header[1])
        payoff_range = PayoffRange(float(header[3]), float(header[4]))
    except ValueError as exc:
        raise ValueError(f"malformed header line: {lines[0]!r}") from exc
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")

    hidden_column: Optional[int] = None
    body = lines[1:]
    if body and body[-1].startswith("hidden"):
        parts = body[-1].split()
        if len(parts) != 2:
            raise ValueError(f"malformed sidecar line: {body[-1]!r}")
        try:
            hidden_column = int(parts[1])
        except ValueError as exc:
            raise ValueError(f"malformed sidecar line: {body[-1]!r}") from exc
        if not 0 <= hidden_column < k:
            raise ValueError(f"hidden column {hidden_column} outside [0, {k})")
        body = body[:-1]

    if len(body) != 2 * k + 1 or body[k] != "":
        raise ValueError("expected k row-player lines, a blank line and k column-player lines")

    row = _parse_rows(body[:k], k, "row payoffs")
    col = _parse_rows(body[k + 1 :], k, "column payoffs")
    return BimatrixGame(row, col, payoff_range), hidden_column


def load_game(path: Path) -> BimatrixGame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Game file not found: {path}")
    game, _ = parse_game(path.read_text(encoding="utf-8"))
    return game


def save_profile(profile: MixedProfile, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        " ".join(_format_value(value) for value in profile.row_strategy),
        " ".join(_format_value(value) for value in profile.col_strategy),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_profile(path: Path) -> MixedProfile:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Profile file not found: {path}")
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if len(lines) != 2:
        raise ValueError(f"profile file must have two lines, found {len(lines)}")
    try:
        x = [float(token) for token in lines[0].split()]
        y = [float(token) for token in lines[1].split()]
    except ValueError as exc:
        raise ValueError("profile file contains non-numeric entries") from exc
    return MixedProfile(np.array(x), np.array(y))
