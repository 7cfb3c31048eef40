"""Payoff-query oracles with exact query accounting.

Algorithms never see payoff matrices. They ask an oracle for single cells,
whole rows or columns, or batches of cells with repetition counts, and every
repetition is charged as one query in the oracle's :class:`QueryLedger`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Set, Tuple, Union

import numpy as np

from .games import SIGNED_RANGE, BimatrixGame, MixedProfile, PayoffRange

__all__ = [
    "LEDGER_FIELD_ORDER",
    "QueryAnswer",
    "CellAnswers",
    "BudgetExhausted",
    "RunFailure",
    "BudgetExhaustedError",
    "QueryLedger",
    "LedgerEntry",
    "PayoffOracle",
    "MatrixOracle",
    "BudgetedOracle",
    "TransformedOracle",
    "budgeted",
    "difference_oracle",
    "half_difference_oracle",
    "expect",
    "unresolved_columns",
]

LEDGER_FIELD_ORDER = ["row", "col", "a", "b", "order"]


@dataclass(frozen=True)
class QueryAnswer:
    """Payoffs ``(a, b)`` revealed by one query."""

    a: float
    b: float


@dataclass(frozen=True, eq=False)
class CellAnswers:
    """Answers for a batch of cells; ``counts[n]`` repetitions of cell n."""

    rows: np.ndarray
    cols: np.ndarray
    counts: np.ndarray
    row_payoffs: np.ndarray
    col_payoffs: np.ndarray

    @property
    def queries(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class BudgetExhausted:
    """Result variant returned instead of answers once a budget is spent."""

    requested: int
    remaining: int


class RunFailure(RuntimeError):
    """An algorithm run that could not produce its guaranteed output."""

    def __init__(self, message: str, partial_profile: Optional[MixedProfile] = None) -> None:
        super().__init__(message)
        self.partial_profile = partial_profile

    def with_profile(self, profile: Optional[MixedProfile]) -> "RunFailure":
        if self.partial_profile is None and profile is not None:
            self.partial_profile = profile
        return self


class BudgetExhaustedError(RunFailure):
    """Raised by algorithms when their oracle answered with :class:`BudgetExhausted`."""


AnyAnswer = Union[QueryAnswer, CellAnswers]


def expect(result: Union[AnyAnswer, BudgetExhausted]) -> AnyAnswer:
    """Unwrap an oracle result, turning the exhaustion signal into an error."""

    if isinstance(result, BudgetExhausted):
        raise BudgetExhaustedError(
            f"query budget exhausted ({result.requested} requested, {result.remaining} left)"
        )
    return result


@dataclass(frozen=True)
class LedgerEntry:
    order: int
    row: int
    col: int
    a: float
    b: float

    def to_dict(self) -> Dict[str, object]:
        return {"row": self.row, "col": self.col, "a": self.a, "b": self.b, "order": self.order}


class QueryLedger:
    """Counts, answered cells and (optionally) the query order of one oracle."""

    def __init__(self, k: int, *, keep_log: bool = True) -> None:
        self.k = k
        self.keep_log = keep_log
        self.total_count = 0
        self.row_counts = np.zeros(k, dtype=np.int64)
        self.column_counts = np.zeros(k, dtype=np.int64)
        self.queried = np.zeros((k, k), dtype=bool)
        self.row_payoffs = np.full((k, k), np.nan)
        self.col_payoffs = np.full((k, k), np.nan)
        self._log: List[Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]] = []

    def record(
        self,
        rows: np.ndarray,
        cols: np.ndarray,
        counts: Optional[np.ndarray],
        row_payoffs: np.ndarray,
        col_payoffs: np.ndarray,
    ) -> None:
        if counts is None:
            added = int(rows.size)
            self.row_counts += np.bincount(rows, minlength=self.k)
            self.column_counts += np.bincount(cols, minlength=self.k)
        else:
            added = int(counts.sum())
            self.row_counts += np.bincount(rows, weights=counts, minlength=self.k).astype(np.int64)
            self.column_counts += np.bincount(cols, weights=counts, minlength=self.k).astype(
                np.int64
            )
        self.total_count += added
        self.queried[rows, cols] = True
        self.row_payoffs[rows, cols] = row_payoffs
        self.col_payoffs[rows, cols] = col_payoffs
        if self.keep_log:
            self._log.append((rows, cols, counts))

    @property
    def answered_count(self) -> int:
        return int(self.queried.sum())

    def answer(self, i: int, j: int) -> Optional[QueryAnswer]:
        if not self.queried[i, j]:
            return None
        return QueryAnswer(float(self.row_payoffs[i, j]), float(self.col_payoffs[i, j]))

    def answered(self) -> Dict[Tuple[int, int], QueryAnswer]:
        rows, cols = np.nonzero(self.queried)
        return {
            (int(i), int(j)): QueryAnswer(float(self.row_payoffs[i, j]), float(self.col_payoffs[i, j]))
            for i, j in zip(rows, cols)
        }

    def iter_queries(self) -> Iterator[LedgerEntry]:
        if not self.keep_log:
            raise ValueError("this ledger was created without a query log")
        order = 0
        for rows, cols, counts in self._log:
            repeats = np.ones(rows.size, dtype=np.int64) if counts is None else counts
            for i, j, n in zip(rows, cols, repeats):
                a = float(self.row_payoffs[i, j])
                b = float(self.col_payoffs[i, j])
                for _ in range(int(n)):
                    order += 1
                    yield LedgerEntry(order=order, row=int(i), col=int(j), a=a, b=b)

    def export_csv(self, output_path: Path) -> int:
        """Write the ledger as ``row,col,a,b,order`` rows; returns the row count."""

        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        written = 0
        with output_path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=LEDGER_FIELD_ORDER)
            writer.writeheader()
            for entry in self.iter_queries():
                writer.writerow(entry.to_dict())
                written += 1
        return written

    def same_as(self, other: "QueryLedger") -> bool:
        """True when both ledgers hold identical counts and answers."""

        return (
            self.k == other.k
            and self.total_count == other.total_count
            and np.array_equal(self.row_counts, other.row_counts)
            and np.array_equal(self.column_counts, other.column_counts)
            and np.array_equal(self.queried, other.queried)
            and np.array_equal(self.row_payoffs, other.row_payoffs, equal_nan=True)
            and np.array_equal(self.col_payoffs, other.col_payoffs, equal_nan=True)
        )


def unresolved_columns(ledger: QueryLedger) -> Set[int]:
    """Columns in which no recorded answer gave the column player payoff 0."""

    zero_found = ledger.queried & (ledger.col_payoffs == 0.0)
    return {int(j) for j in np.flatnonzero(~zero_found.any(axis=0))}


OracleResult = Union[CellAnswers, BudgetExhausted]


class PayoffOracle:
    """Base class; subclasses implement :meth:`_lookup` (or wrap another oracle)."""

    def __init__(
        self,
        k: int,
        payoff_range: PayoffRange,
        *,
        ledger: Optional[QueryLedger] = None,
        keep_log: bool = True,
    ) -> None:
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        self.k = k
        self.payoff_range = payoff_range
        self.ledger = ledger if ledger is not None else QueryLedger(k, keep_log=keep_log)
        self._all_indices = np.arange(k)
        self._all_indices.setflags(write=False)

    def remaining(self) -> Optional[int]:
        """Queries left before exhaustion, or None when unlimited."""

        return None

    def query(self, i: int, j: int) -> Union[QueryAnswer, BudgetExhausted]:
        result = self.query_cells(np.array([i]), np.array([j]))
        if isinstance(result, BudgetExhausted):
            return result
        return QueryAnswer(float(result.row_payoffs[0]), float(result.col_payoffs[0]))

    def query_row(self, i: int) -> OracleResult:
        self._check_index(i)
        rows = np.broadcast_to(np.intp(i), (self.k,))
        return self._serve(rows, self._all_indices, None)

    def query_column(self, j: int) -> OracleResult:
        self._check_index(j)
        cols = np.broadcast_to(np.intp(j), (self.k,))
        return self._serve(self._all_indices, cols, None)

    def query_cells(
        self,
        rows: np.ndarray,
        cols: np.ndarray,
        counts: Optional[np.ndarray] = None,
    ) -> OracleResult:
        rows = np.asarray(rows, dtype=np.intp).ravel()
        cols = np.asarray(cols, dtype=np.intp).ravel()
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have the same length")
        if rows.size and (rows.min() < 0 or rows.max() >= self.k or cols.min() < 0 or cols.max() >= self.k):
            raise ValueError(f"query index outside [0, {self.k})")
        if counts is not None:
            counts = np.asarray(counts, dtype=np.int64).ravel()
            if counts.shape != rows.shape:
                raise ValueError("counts must match the number of cells")
            if np.any(counts < 0):
                raise ValueError("repetition counts must be non-negative")
            keep = counts > 0
            rows, cols, counts = rows[keep], cols[keep], counts[keep]
        return self._serve(rows, cols, counts)

    def _check_index(self, index: int) -> None:
        if not 0 <= index < self.k:
            raise ValueError(f"query index {index} outside [0, {self.k})")

    def _serve(
        self, rows: np.ndarray, cols: np.ndarray, counts: Optional[np.ndarray]
    ) -> OracleResult:
        row_payoffs, col_payoffs = self._lookup(rows, cols, counts)
        self.ledger.record(rows, cols, counts, row_payoffs, col_payoffs)
        return CellAnswers(
            rows=rows,
            cols=cols,
            counts=np.ones(rows.size, dtype=np.int64) if counts is None else counts,
            row_payoffs=row_payoffs,
            col_payoffs=col_payoffs,
        )

    def _lookup(
        self, rows: np.ndarray, cols: np.ndarray, counts: Optional[np.ndarray]
    ) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


class MatrixOracle(PayoffOracle):
    """Answers from a fixed game."""

    def __init__(self, game: BimatrixGame, *, keep_log: bool = True) -> None:
        super().__init__(game.k, game.payoff_range, keep_log=keep_log)
        self.game = game

    def _lookup(self, rows, cols, counts):
        return self.game.row_payoffs[rows, cols], self.game.col_payoffs[rows, cols]


class BudgetedOracle(PayoffOracle):
    """Refuses batches that would exceed ``budget`` queries; shares the inner ledger."""

    def __init__(self, inner: PayoffOracle, budget: int) -> None:
        if budget < 0:
            raise ValueError(f"budget must be non-negative, got {budget}")
        super().__init__(inner.k, inner.payoff_range, ledger=inner.ledger)
        self.inner = inner
        self.budget = budget
        self._start = inner.ledger.total_count

    def remaining(self) -> Optional[int]:
        own = self.budget - (self.ledger.total_count - self._start)
        inner = self.inner.remaining()
        return own if inner is None else min(own, inner)

    def _serve(self, rows, cols, counts):
        requested = int(rows.size if counts is None else counts.sum())
        left = self.remaining()
        if left is not None and requested > left:
            return BudgetExhausted(requested=requested, remaining=left)
        return self.inner._serve(rows, cols, counts)


class TransformedOracle(PayoffOracle):
    """Serves a derived game through an entrywise map of the inner answers."""

    def __init__(
        self,
        inner: PayoffOracle,
        transform: Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]],
        payoff_range: PayoffRange,
    ) -> None:
        super().__init__(inner.k, payoff_range, ledger=inner.ledger)
        self.inner = inner
        self.transform = transform

    def remaining(self) -> Optional[int]:
        return self.inner.remaining()

    def _serve(self, rows, cols, counts):
        result = self.inner._serve(rows, cols, counts)
        if isinstance(result, BudgetExhausted):
            return result
        row_payoffs, col_payoffs = self.transform(result.row_payoffs, result.col_payoffs)
        return CellAnswers(
            rows=result.rows,
            cols=result.cols,
            counts=result.counts,
            row_payoffs=row_payoffs,
            col_payoffs=col_payoffs,
        )


def budgeted(oracle: PayoffOracle, budget: int) -> BudgetedOracle:
    return BudgetedOracle(oracle, budget)


def _difference(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    d = a - b
    return d, -d


def _half_difference(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    d = 0.5 * (a - b)
    return d, -d


def difference_oracle(oracle: PayoffOracle) -> TransformedOracle:
    """The zero-sum game (R − C, C − R) of a unit-range oracle."""

    return TransformedOracle(oracle, _difference, SIGNED_RANGE)


def half_difference_oracle(oracle: PayoffOracle) -> TransformedOracle:
    """The zero-sum game (D, −D) with D = ½(R − C)."""

    return TransformedOracle(oracle, _half_difference, SIGNED_RANGE)
