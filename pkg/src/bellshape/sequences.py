"""Two-sided sequences, forward differences and the bell-shape verifier.

A two-sided sequence is stored as a finite window ``values`` starting at
index ``offset``. Outside the window the sequence is either exactly zero
(``tail_mode="exact_zero"``) or unknown but small (``tail_mode="truncated"``),
in which case ``deficit`` bounds the discarded absolute mass and the flags
``open_left`` / ``open_right`` record on which side entries were dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import EmptySequence, WindowTooNarrow

TAIL_MODES = ("exact_zero", "truncated")


@dataclass(frozen=True, eq=False)
class TwoSidedSequence:
    """Finitely windowed real sequence on the integers.

    Parameters
    ----------
    offset : int
        Index of ``values[0]``.
    values : array_like
        Nonempty, finite entries.
    tail_mode : {"exact_zero", "truncated"}
    deficit : float
        Bound on the discarded absolute mass (must be 0 for exact tails).
    open_left, open_right : bool
        Which sides were truncated. Ignored for exact tails.
    """

    offset: int
    values: np.ndarray
    tail_mode: str = "exact_zero"
    deficit: float = 0.0
    open_left: bool = True
    open_right: bool = True

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size == 0:
            raise EmptySequence("sequence window is empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("sequence entries must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "offset", int(self.offset))
        if self.tail_mode not in TAIL_MODES:
            raise ValueError(f"unknown tail_mode {self.tail_mode!r}")
        d = float(self.deficit)
        if not d >= 0:
            raise ValueError("deficit must be nonnegative")
        if self.tail_mode == "exact_zero":
            if d != 0:
                raise ValueError("exact_zero sequences carry no deficit")
            object.__setattr__(self, "open_left", False)
            object.__setattr__(self, "open_right", False)
        else:
            object.__setattr__(self, "open_left", bool(self.open_left))
            object.__setattr__(self, "open_right", bool(self.open_right))
        object.__setattr__(self, "deficit", d)

    # -- views ---------------------------------------------------------
    def __len__(self):
        return self.values.size

    @property
    def stop(self) -> int:
        """One past the last stored index."""
        return self.offset + self.values.size

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.stop)

    @property
    def truncated(self) -> bool:
        return self.tail_mode == "truncated"

    def __call__(self, k):
        """Stored value at ``k`` (zero outside the window)."""
        k = np.asarray(k, dtype=int)
        j = k - self.offset
        inside = (j >= 0) & (j < self.values.size)
        out = np.zeros(k.shape)
        out[inside] = self.values[j[inside]]
        return out if out.ndim else float(out)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Values at ``lo..hi`` inclusive, zero-filled."""
        return self(np.arange(lo, hi + 1))

    def with_values(self, offset, values, deficit=None) -> "TwoSidedSequence":
        return TwoSidedSequence(
            offset,
            values,
            self.tail_mode,
            self.deficit if deficit is None else deficit,
            self.open_left,
            self.open_right,
        )

    def __eq__(self, other):
        if not isinstance(other, TwoSidedSequence):
            return NotImplemented
        return (
            self.offset == other.offset
            and self.tail_mode == other.tail_mode
            and self.deficit == other.deficit
            and self.open_left == other.open_left
            and self.open_right == other.open_right
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"TwoSidedSequence(offset={self.offset}, len={len(self)}, "
            f"tail_mode={self.tail_mode!r}, deficit={self.deficit:.3g})"
        )


SequenceLike = Union[TwoSidedSequence, Sequence[float], np.ndarray]


def delta(k: int = 0) -> TwoSidedSequence:
    """Unit mass at ``k``."""
    return TwoSidedSequence(k, [1.0])


def from_values(values, offset: int = 0) -> TwoSidedSequence:
    return TwoSidedSequence(offset, values)


def _as_array(seq: SequenceLike) -> np.ndarray:
    if isinstance(seq, TwoSidedSequence):
        return seq.values
    return np.asarray(seq, dtype=float).ravel()


def _default_tol(a: np.ndarray) -> float:
    return 1e-12 * float(np.max(np.abs(a))) if a.size else 0.0


def shift(seq: TwoSidedSequence, m: int) -> TwoSidedSequence:
    """k -> a(k - m)."""
    return seq.with_values(seq.offset + m, seq.values)


def scale(seq: TwoSidedSequence, factor: float) -> TwoSidedSequence:
    return seq.with_values(seq.offset, seq.values * factor, seq.deficit * abs(factor))


def forward_difference(seq: TwoSidedSequence, n: int = 1) -> TwoSidedSequence:
    """Iterated forward difference by repeated first differences.

    Each step extends the window one index to the left; the deficit of a
    truncated sequence grows by a factor 2 per step.
    """
    if n < 0:
        raise ValueError("order must be nonnegative")
    v = seq.values
    for _ in range(n):
        v = np.diff(np.concatenate(([0.0], v, [0.0])))
    return seq.with_values(seq.offset - n, v, seq.deficit * 2.0**n)


def _signs(a: np.ndarray, tol: float) -> np.ndarray:
    s = np.sign(a)
    s[np.abs(a) <= tol] = 0
    return s[s != 0]


def count_sign_changes(seq: SequenceLike, tol: float | None = None) -> int:
    """Number of sign changes, entries with ``|a| <= tol`` skipped."""
    a = _as_array(seq)
    if tol is None:
        tol = _default_tol(a)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    s = _signs(a, tol)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def sign_change_locations(seq: SequenceLike, tol: float | None = None) -> list[int]:
    """Greedy alternating subsequence positions.

    The first entry is the first index with a nonzero sign, every further
    entry the first index after the previous one where the sign flips.
    """
    a = _as_array(seq)
    off = seq.offset if isinstance(seq, TwoSidedSequence) else 0
    if tol is None:
        tol = _default_tol(a)
    idx = np.flatnonzero(np.abs(a) > tol)
    if idx.size == 0:
        raise EmptySequence("all entries are within tol of zero")
    s = np.sign(a[idx])
    keep = np.concatenate(([True], s[1:] != s[:-1]))
    return [int(off + i) for i in idx[keep]]


def mirror(seq: TwoSidedSequence) -> TwoSidedSequence:
    """k -> a(-k)."""
    return TwoSidedSequence(
        -(seq.stop - 1),
        seq.values[::-1],
        seq.tail_mode,
        seq.deficit,
        seq.open_right,
        seq.open_left,
    )


def normalize(seq: TwoSidedSequence) -> TwoSidedSequence:
    """Rescale to unit sum over the stored window."""
    total = float(np.sum(seq.values))
    if total == 0:
        raise EmptySequence("cannot normalise a sequence with zero sum")
    return scale(seq, 1.0 / total)


@dataclass(frozen=True)
class BellShapeReport:
    max_order: int
    counts: tuple
    verdict: bool
    failure_order: int | None = None
    nonnegative: bool = True
    tol: float = 0.0
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "max_order": self.max_order,
            "counts": list(self.counts),
            "verdict": self.verdict,
            "failure_order": self.failure_order,
            "nonnegative": self.nonnegative,
            "tol": self.tol,
        }


def verify_bell_shaped(
    seq: TwoSidedSequence, n_max: int, tol: float | None = None
) -> BellShapeReport:
    """Check that Δⁿa changes sign exactly n times for n = 0..n_max.

    Exact-zero sides are zero padded so that every nonzero difference is
    seen. Truncated sides are zero padded too when C(n_max, n_max/2)·deficit
    ≤ tol, because the unknown tail then cannot flip the sign of any entry
    that exceeds tol. Otherwise only differences whose stencil lies inside
    the stored window are counted; if such a count falls short of ``n``
    the window cannot decide the question and :class:`WindowTooNarrow` is
    raised.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    a = seq.values
    if tol is None:
        tol = _default_tol(a)
    nonneg = bool(np.all(a >= -tol))
    nontrivial = bool(np.any(np.abs(a) > tol))

    # An unknown tail of mass d moves any entry of Δⁿ by at most C(n, n/2)·d,
    # so below tol it can be replaced by zeros without changing a counted sign.
    pad_ok = math.comb(n_max, n_max // 2) * seq.deficit <= tol
    left_open = seq.truncated and seq.open_left and not pad_ok
    right_open = seq.truncated and seq.open_right and not pad_ok
    left_pad = 0 if left_open else n_max
    right_pad = 0 if right_open else n_max
    undecidable = left_open or right_open
    if undecidable and a.size + left_pad + right_pad <= n_max:
        raise WindowTooNarrow(f"window of {a.size} entries cannot hold order {n_max}")
    d = np.concatenate((np.zeros(left_pad), a, np.zeros(right_pad)))

    counts = []
    failure = None if (nonneg and nontrivial) else 0
    for n in range(n_max + 1):
        if n:
            d = np.diff(d)
        c = count_sign_changes(d, tol)
        if c < n and undecidable and failure is None:
            raise WindowTooNarrow(
                f"order {n}: only {c} sign changes resolved inside the window"
            )
        counts.append(c)
        if c != n and failure is None:
            failure = n
    return BellShapeReport(
        max_order=n_max,
        counts=tuple(counts),
        verdict=failure is None,
        failure_order=failure,
        nonnegative=nonneg,
        tol=float(tol),
    )


def restrict(seq: TwoSidedSequence, lo: int, hi: int) -> TwoSidedSequence:
    """Keep indices ``lo..hi``; dropped absolute mass moves into the deficit.

    Indices of the new window that fall outside the stored one are filled
    with zeros (only meaningful for exact tails).
    """
    if seq.truncated:
        # never pad an open side with zeros that are not known to be zero
        if seq.open_left:
            lo = max(lo, seq.offset)
        if seq.open_right:
            hi = min(hi, seq.stop - 1)
    if hi < lo:
        raise EmptySequence("empty window")
    a = seq.values
    left_cut = a[: max(0, min(a.size, lo - seq.offset))]
    right_cut = a[max(0, hi + 1 - seq.offset):]
    dropped = float(np.abs(left_cut).sum() + np.abs(right_cut).sum())
    open_left = (seq.truncated and seq.open_left) or bool(np.any(left_cut != 0))
    open_right = (seq.truncated and seq.open_right) or bool(np.any(right_cut != 0))
    deficit = seq.deficit + dropped
    mode = "truncated" if (open_left or open_right or deficit > 0) else "exact_zero"
    if mode == "exact_zero":
        deficit = 0.0
    return TwoSidedSequence(lo, seq.window(lo, hi), mode, deficit, open_left, open_right)
