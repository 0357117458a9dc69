"""Response matrices: validation, pattern aggregation and category inference."""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..utils import config, get_logger
from ..utils.errors import EmptyDataError, MissingColumnError, ResponseValidationError

logger = get_logger(__name__)


@dataclass(frozen=True)
class RawResponses:
    """
    Unit-by-unit responses.

    Attributes:
        rows: n x r integer matrix of category codes (0 .. l_j - 1)
        missing_code: sentinel marking a missing response
    """
    rows: np.ndarray
    missing_code: int = field(default_factory=lambda: config.missing_code)

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim == 1:
            rows = rows.reshape(-1, 1)
        if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
            raise EmptyDataError("Response matrix must have at least one row and one item")
        if not np.issubdtype(rows.dtype, np.integer):
            bad = ~np.isclose(rows, np.round(rows))
            if bad.any():
                i, j = np.argwhere(bad)[0]
                raise ResponseValidationError(int(i), int(j), rows[i, j], "not an integer")
            rows = np.round(rows).astype(np.int64)
        object.__setattr__(self, "rows", rows.astype(np.int64, copy=False))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def r(self) -> int:
        return self.rows.shape[1]

    @property
    def missing(self) -> np.ndarray:
        """Boolean mask of missing cells."""
        return self.rows == self.missing_code

    def validate(self, cats: Optional[Sequence[int]] = None) -> None:
        """
        Check every observed code against the item's category range.

        Raises:
            ResponseValidationError: first offending cell, in row-major order
        """
        observed = ~self.missing
        upper = None if cats is None else np.asarray(cats).reshape(1, -1)
        bad = observed & (self.rows < 0)
        if upper is not None:
            if upper.shape[1] != self.r:
                raise MissingColumnError(f"Expected {self.r} category counts, got {upper.shape[1]}")
            bad |= observed & (self.rows >= upper)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            limit = "" if upper is None else f" (item has {upper[0, j]} categories)"
            raise ResponseValidationError(int(i), int(j), int(self.rows[i, j]), f"out of range{limit}")


@dataclass(frozen=True)
class ResponseMatrix:
    """
    Distinct response patterns with their frequencies.

    Attributes:
        patterns: m x r matrix of distinct configurations; missing cells hold -1
        missing: m x r boolean mask of missing cells
        freq: length-m positive counts
        labels: length-n index (0-based) of each original row's pattern
        cats: length-r category counts l_j
    """
    patterns: np.ndarray
    missing: np.ndarray
    freq: np.ndarray
    labels: np.ndarray
    cats: tuple[int, ...]

    @property
    def m(self) -> int:
        return self.patterns.shape[0]

    @property
    def r(self) -> int:
        return self.patterns.shape[1]

    @property
    def n(self) -> int:
        return int(self.freq.sum())

    @property
    def observed(self) -> np.ndarray:
        return ~self.missing

    def indicators(self, j: int) -> np.ndarray:
        """m x l_j one-hot matrix of item j; rows of missing responses are zero."""
        out = np.zeros((self.m, self.cats[j]))
        rows = np.flatnonzero(self.observed[:, j])
        out[rows, self.patterns[rows, j]] = 1.0
        return out

    def expand(self, missing_code: Optional[int] = None) -> RawResponses:
        """Rebuild the unit-by-unit matrix from the labels."""
        code = config.missing_code if missing_code is None else missing_code
        rows = np.where(self.missing, code, self.patterns)[self.labels]
        return RawResponses(rows=rows, missing_code=code)

    def to_dict(self) -> dict:
        """JSON-ready dictionary; labels are 1-based, missing cells are null."""
        patterns = [
            [None if miss else int(v) for v, miss in zip(row, mask)]
            for row, mask in zip(self.patterns, self.missing)
        ]
        return {
            "n": self.n,
            "m": self.m,
            "r": self.r,
            "cats": list(self.cats),
            "patterns": patterns,
            "freq": self.freq.astype(int).tolist(),
            "labels": (self.labels + 1).astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ResponseMatrix":
        raw = payload["patterns"]
        missing = np.array([[v is None for v in row] for row in raw], dtype=bool)
        patterns = np.array([[-1 if v is None else int(v) for v in row] for row in raw], dtype=np.int64)
        return cls(
            patterns=patterns,
            missing=missing,
            freq=np.asarray(payload["freq"], dtype=float),
            labels=np.asarray(payload["labels"], dtype=np.int64) - 1,
            cats=tuple(int(c) for c in payload["cats"]),
        )


def infer_categories(raw: RawResponses) -> tuple[int, ...]:
    """
    Category count per item: one plus the largest observed code.

    Raises:
        MissingColumnError: an item with no observed response
    """
    observed = ~raw.missing
    empty = np.flatnonzero(~observed.any(axis=0))
    if empty.size:
        raise MissingColumnError(f"Item {empty[0] + 1} has no observed responses")
    masked = np.where(observed, raw.rows, -1)
    return tuple(int(v) + 1 for v in masked.max(axis=0))


def aggregate(raw: RawResponses, cats: Optional[Sequence[int]] = None) -> ResponseMatrix:
    """
    Collapse identical response rows into distinct patterns.

    Patterns are listed in order of first occurrence. Missing cells take part
    in the comparison, so two rows are identical only if they are missing on
    the same items.

    Args:
        raw: unit-by-unit responses
        cats: explicit category counts; inferred from the data when omitted

    Returns:
        ResponseMatrix with freq summing to raw.n
    """
    cats = tuple(int(c) for c in cats) if cats is not None else infer_categories(raw)
    raw.validate(cats)

    missing = raw.missing
    keyed = np.where(missing, -1, raw.rows)
    _, first, inverse = np.unique(keyed, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)

    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)

    labels = rank[inverse]
    patterns = keyed[first[order]]
    freq = np.bincount(labels, minlength=order.size).astype(float)

    logger.debug(f"Aggregated {raw.n} rows into {patterns.shape[0]} patterns")
    return ResponseMatrix(
        patterns=patterns,
        missing=patterns < 0,
        freq=freq,
        labels=labels,
        cats=cats,
    )


def from_patterns(
    patterns: np.ndarray,
    freq: Sequence[float],
    cats: Optional[Sequence[int]] = None,
    missing_code: Optional[int] = None,
) -> ResponseMatrix:
    """Build a ResponseMatrix from already distinct patterns and their counts."""
    code = config.missing_code if missing_code is None else missing_code
    raw = RawResponses(rows=np.asarray(patterns), missing_code=code)
    cats = tuple(int(c) for c in cats) if cats is not None else infer_categories(raw)
    raw.validate(cats)
    missing = raw.missing
    freq = np.asarray(freq, dtype=float)
    if freq.shape != (raw.n,) or (freq <= 0).any():
        raise EmptyDataError("freq must hold one positive count per pattern")
    return ResponseMatrix(
        patterns=np.where(missing, -1, raw.rows),
        missing=missing,
        freq=freq,
        labels=np.repeat(np.arange(raw.n), freq.astype(np.int64)),
        cats=cats,
    )
