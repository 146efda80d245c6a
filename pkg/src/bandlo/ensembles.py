"""Band matrix ensembles and the interval/block decomposition.

Matrix kinds
------------
general   ±1 inside the band |i-j| <= d, configurable law outside.
block     d | n; block-tridiagonal tiling of ±1 blocks D_k, U_k, T_k with
          wrap-around corner blocks (the top-right and bottom-left tiles).
periodic  ±1 on |i-j| <= d and on the wrapped corners |i-j| >= n-d.
modified  ±1 strictly inside the band (|i-j| < d), zero elsewhere.

All indices in this module are 0-based; interval bounds are half-open
Python ranges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .rng import derive_key, sign_array, uniform_below

__all__ = [
    "OffbandLaw",
    "BandProfile",
    "BandMeta",
    "IntegerMatrix",
    "IntervalPartition",
    "RowContext",
    "sample_matrix",
    "partition_intervals",
    "row_context",
    "zero_row",
    "extract_comparison_matrix",
    "diagonal_block",
    "upper_block",
    "lower_block",
]

KINDS = ("general", "block", "periodic", "modified")


@dataclass(frozen=True)
class OffbandLaw:
    """Entry law outside the band for the general kind.

    One of: zero, rademacher (±1), uniform_range(a, b) inclusive,
    constant(c).
    """

    kind: str = "zero"
    a: int = 0
    b: int = 0
    c: int = 0

    @staticmethod
    def zero() -> "OffbandLaw":
        return OffbandLaw("zero")

    @staticmethod
    def rademacher() -> "OffbandLaw":
        return OffbandLaw("rademacher")

    @staticmethod
    def uniform_range(a: int, b: int) -> "OffbandLaw":
        if a > b:
            raise ValueError(f"empty range [{a}, {b}]")
        return OffbandLaw("uniform_range", a=a, b=b)

    @staticmethod
    def constant(c: int) -> "OffbandLaw":
        return OffbandLaw("constant", c=c)

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "rademacher", "uniform_range", "constant"):
            raise ValueError(f"unknown off-band law {self.kind!r}")

    def is_random(self) -> bool:
        return self.kind in ("rademacher", "uniform_range")


@dataclass(frozen=True)
class BandProfile:
    """Declarative description of one ensemble instance."""

    n: int
    d: int
    kind: str = "general"
    offband: OffbandLaw = field(default_factory=OffbandLaw.zero)
    alpha: float | None = None  # used only for reporting/fits

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (1 <= self.d <= self.n):
            raise ValueError(f"need 1 <= d <= n, got d={self.d}, n={self.n}")
        if self.kind == "block" and self.n % self.d != 0:
            raise ValueError(
                f"block kind requires d | n, got n={self.n}, d={self.d}"
            )
        if self.kind != "general" and self.offband.kind != "zero":
            raise ValueError("off-band law applies to the general kind only")


@dataclass(frozen=True)
class BandMeta:
    """Structural hint: entries vanish outside the (possibly wrapped) band.

    has_corners=False: a[i,j] = 0 whenever |i-j| > d.
    has_corners=True:  a[i,j] = 0 whenever d < |i-j| < n-d.
    """

    d: int
    has_corners: bool = False


@dataclass(frozen=True, eq=False)
class IntegerMatrix:
    """Exact integer matrix (int64 entries) with optional band metadata."""

    entries: np.ndarray
    band_meta: BandMeta | None = None

    def __post_init__(self) -> None:
        e = self.entries
        if e.ndim != 2:
            raise ValueError("entries must be 2-dimensional")
        if e.dtype != np.int64:
            object.__setattr__(self, "entries", e.astype(np.int64))

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]

    def check_band_meta(self) -> bool:
        """Verify the zero pattern promised by band_meta (True if no meta)."""
        if self.band_meta is None:
            return True
        n_r, n_c = self.entries.shape
        i, j = np.indices((n_r, n_c), sparse=True)
        dist = np.abs(i - j)
        if self.band_meta.has_corners:
            outside = (dist > self.band_meta.d) & (dist < max(n_r, n_c) - self.band_meta.d)
        else:
            outside = dist > self.band_meta.d
        return not np.any(self.entries[np.broadcast_to(outside, (n_r, n_c))])


def _offsets_to_indices(n: int, offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.unique(offsets)
    cols = np.arange(n, dtype=np.int64)[:, None] + offsets[None, :]
    rows = np.broadcast_to(np.arange(n, dtype=np.int64)[:, None], cols.shape)
    valid = (cols >= 0) & (cols < n)
    return rows[valid], cols[valid]


def _support_indices(profile: BandProfile) -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices of the ±1-law positions, O(n d) for band kinds."""
    n, d = profile.n, profile.d
    if profile.kind == "general":
        return _offsets_to_indices(n, np.arange(-d, d + 1))
    if profile.kind == "modified":
        return _offsets_to_indices(n, np.arange(-(d - 1), d))
    if profile.kind == "periodic":
        offs = np.concatenate([
            np.arange(-(n - 1), -(n - d) + 1),
            np.arange(-d, d + 1),
            np.arange(n - d, n),
        ])
        return _offsets_to_indices(n, offs)
    # block: tile tridiagonal plus wrap-around corner tiles
    m = n // d
    ii_parts, jj_parts = [], []
    for bi in range(m):
        col_blocks = {max(bi - 1, 0), bi, min(bi + 1, m - 1)}
        if bi == 0:
            col_blocks.add(m - 1)
        if bi == m - 1:
            col_blocks.add(0)
        cols = np.concatenate([np.arange(b * d, (b + 1) * d, dtype=np.int64)
                               for b in sorted(col_blocks)])
        rows = np.arange(bi * d, (bi + 1) * d, dtype=np.int64)
        ii_parts.append(np.repeat(rows, len(cols)))
        jj_parts.append(np.tile(cols, len(rows)))
    return np.concatenate(ii_parts), np.concatenate(jj_parts)


def _support_mask(profile: BandProfile) -> np.ndarray:
    """Boolean mask of the ±1-law positions for the profile's kind."""
    n = profile.n
    mask = np.zeros((n, n), dtype=bool)
    ii, jj = _support_indices(profile)
    mask[ii, jj] = True
    return mask


def _band_meta_for(profile: BandProfile) -> BandMeta | None:
    n, d = profile.n, profile.d
    if profile.kind == "general":
        return BandMeta(d, False) if profile.offband.kind == "zero" else None
    if profile.kind == "periodic":
        return BandMeta(d, True)
    if profile.kind == "modified":
        return BandMeta(d - 1, False)  # support is strict: |i-j| < d
    # block: tile tridiagonal reaches |i-j| <= 2d-1, corners wrap
    m = n // d
    return BandMeta(2 * d - 1, True) if m > 1 else BandMeta(n - 1, False)


def sample_matrix(profile: BandProfile, seed: int) -> IntegerMatrix:
    """Sample one matrix; deterministic pure function of (profile, seed).

    Entry (i, j) is derived from the counter i*n + j under a key split
    from the seed, so the draw is independent of evaluation order.
    """
    n = profile.n
    out = np.zeros((n, n), dtype=np.int64)
    ii, jj = _support_indices(profile)
    counters = ii.astype(np.uint64) * np.uint64(n) + jj.astype(np.uint64)
    out[ii, jj] = sign_array(derive_key(seed, 0x51), counters)

    law = profile.offband
    if profile.kind == "general" and law.kind != "zero":
        mask = np.zeros((n, n), dtype=bool)
        mask[ii, jj] = True
        oi, oj = np.nonzero(~mask)
        octr = oi.astype(np.uint64) * np.uint64(n) + oj.astype(np.uint64)
        if law.kind == "rademacher":
            out[oi, oj] = sign_array(derive_key(seed, 0x0F), octr)
        elif law.kind == "constant":
            out[oi, oj] = law.c
        else:  # uniform_range
            span = law.b - law.a + 1
            out[oi, oj] = law.a + uniform_below(derive_key(seed, 0x0F), octr, span)
    return IntegerMatrix(out, band_meta=_band_meta_for(profile))


# ---------------------------------------------------------------------------
# Interval partition
# ---------------------------------------------------------------------------

# descending scan grid for s in (2,3), exact rationals
_S_GRID = tuple(
    Fraction(num, den)
    for num, den in (
        (2999, 1000), (299, 100), (29, 10), (28, 10), (27, 10), (26, 10),
        (25, 10), (24, 10), (23, 10), (22, 10), (21, 10), (201, 100),
        (2001, 1000),
    )
)
_S_FALLBACK = Fraction(25, 10)


@dataclass(frozen=True)
class IntervalPartition:
    """Cover of range(n) by consecutive blocks of length e (last may differ).

    Without fallback the last block has length n - e*(n//e) >= e/2 and the
    block count is n//e + 1. With fallback the short/empty tail was merged
    into its predecessor, so the last block has length in [e, 2e).
    """

    n: int
    e: int
    s: Fraction
    intervals: tuple[tuple[int, int], ...]  # half-open (start, stop)
    fallback: bool = False

    @property
    def m(self) -> int:
        return len(self.intervals)

    def block_of(self, index: int) -> int:
        """Block number k with index in intervals[k]."""
        if not (0 <= index < self.n):
            raise IndexError(f"index {index} outside range({self.n})")
        k = min(index // self.e, self.m - 1)
        lo, hi = self.intervals[k]
        if not (lo <= index < hi):  # merged tail
            k = self.m - 1
        return k

    def restrict(self, v: np.ndarray, k: int) -> np.ndarray:
        lo, hi = self.intervals[k]
        return v[lo:hi]


def _build_intervals(n: int, e: int) -> tuple[tuple[int, int], ...]:
    full = n // e
    ivs = [(k * e, (k + 1) * e) for k in range(full)]
    ivs.append((full * e, n))
    return tuple(ivs)


def partition_intervals(n: int, d: int) -> IntervalPartition:
    """Scan s over the grid; accept the first s whose remainder is >= e/2.

    The scan uses exact rational arithmetic (e = floor(d/s) computed as an
    integer division), so grid points like 2.1 can never misround. If no
    grid point works, fall back to s = 2.5 and merge the tail into its
    predecessor, setting the fallback flag.
    """
    if n < 8:
        raise ValueError(f"partition requires n >= 8, got {n}")
    if not (2 <= d <= n):
        raise ValueError(f"need 2 <= d <= n, got d={d}, n={n}")
    if d < 3:
        # e = floor(d/s) = 0 for every s in (2,3), fallback included
        raise ValueError(f"bandwidth {d} too small: block length would be 0")
    for s in _S_GRID:
        e = (d * s.denominator) // s.numerator
        if e < 1:
            continue
        rem = n - e * (n // e)
        if 2 * rem >= e:
            return IntervalPartition(n, e, s, _build_intervals(n, e))
    s = _S_FALLBACK
    e = (d * s.denominator) // s.numerator
    if e < 1:
        raise ValueError(f"bandwidth {d} too small: block length would be 0")
    full = n // e
    rem = n - e * full
    ivs = [(k * e, (k + 1) * e) for k in range(full)]
    if rem > 0:
        ivs[-1] = (ivs[-1][0], n)
    return IntervalPartition(n, e, s, tuple(ivs), fallback=True)


@dataclass(frozen=True)
class RowContext:
    """A distinguished row index and the partition block containing it."""

    index: int
    block: int


def row_context(part: IntervalPartition, index: int) -> RowContext:
    return RowContext(index, part.block_of(index))


# ---------------------------------------------------------------------------
# Row deletion and the block-tridiagonal comparison matrix
# ---------------------------------------------------------------------------

def zero_row(a: IntegerMatrix, index: int) -> IntegerMatrix:
    """Copy of a with the given row zeroed (band metadata preserved)."""
    if not (0 <= index < a.n_rows):
        raise IndexError(f"row {index} outside range({a.n_rows})")
    out = a.entries.copy()
    out[index, :] = 0
    return IntegerMatrix(out, band_meta=a.band_meta)


def extract_comparison_matrix(
    a: IntegerMatrix, part: IntervalPartition, ctx: RowContext
) -> IntegerMatrix:
    """The comparison matrix: keep only the diagonal and first off-diagonal
    blocks of the partition, then zero the distinguished row.

    Entry (i, j) survives iff i and j fall in the same block or in adjacent
    blocks. The result loses wrapped corners, so its band metadata is a pure
    band of width 2e-1 (adjacent blocks reach at most that far).
    """
    n = a.n_rows
    if part.n != n or a.n_cols != n:
        raise ValueError(f"partition over {part.n} does not match matrix {n}x{a.n_cols}")
    if not (0 <= ctx.index < n):
        raise IndexError(f"row {ctx.index} outside range({n})")
    starts = np.fromiter((lo for lo, _ in part.intervals), dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    blk = np.searchsorted(starts, idx, side="right") - 1
    keep = np.abs(blk[:, None] - blk[None, :]) <= 1
    out = np.where(keep, a.entries, 0).astype(np.int64)
    out[ctx.index, :] = 0
    width = max(hi - lo for lo, hi in part.intervals)
    return IntegerMatrix(out, band_meta=BandMeta(2 * width - 1, False))


def diagonal_block(a: IntegerMatrix, part: IntervalPartition, k: int) -> np.ndarray:
    """D_k: rows and columns of block k."""
    lo, hi = part.intervals[k]
    return a.entries[lo:hi, lo:hi]


def upper_block(a: IntegerMatrix, part: IntervalPartition, k: int) -> np.ndarray:
    """U_k: rows of block k-1, columns of block k (defined for k >= 1)."""
    if k < 1:
        raise IndexError("upper block requires k >= 1")
    rlo, rhi = part.intervals[k - 1]
    clo, chi = part.intervals[k]
    return a.entries[rlo:rhi, clo:chi]


def lower_block(a: IntegerMatrix, part: IntervalPartition, k: int) -> np.ndarray:
    """T_k: rows of block k+1, columns of block k (defined for k <= m-2)."""
    if k > part.m - 2:
        raise IndexError("lower block requires k <= m-2")
    rlo, rhi = part.intervals[k + 1]
    clo, chi = part.intervals[k]
    return a.entries[rlo:rhi, clo:chi]
