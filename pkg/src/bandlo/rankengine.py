"""Exact rank, kernel, and singularity over F_p, plus the CRT integer test.

Elimination is plain Gaussian elimination with deterministic pivoting:
the pivot for a column is the first candidate row holding a nonzero
entry. Exact arithmetic needs no magnitude pivoting, and the fixed rule
makes every derived object (rank, canonical kernel) independent of the
storage strategy.

Band awareness: each row carries a static "first possible column" and a
dynamically widened "last possible column". For a pure band of width d
the tracked spans realize the classical 3d+1 fill bound, giving O(n d^2)
work; wrapped corner rows simply enter with full-width spans and act as
the dense border of a bordered scheme. Forcing ``banded=False`` runs the
same elimination with all-dense spans, which is the reference path used
by the equivalence tests.

Word-sized moduli with p <= 2^31 run on vectorized int64 (products stay
under 2^63); larger p fall back to object arrays holding exact Python
integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import BandMeta, IntegerMatrix
from .fieldcore import PrimeModulus, prev_prime

__all__ = [
    "FpMatrix",
    "KernelBasis",
    "reduce_mod",
    "rank_fp",
    "kernel_fp",
    "is_singular_fp",
    "is_singular_Z",
]

_INT64_SAFE_P = 1 << 31  # (p-1)^2 must stay below 2^63


@dataclass(frozen=True, eq=False)
class FpMatrix:
    """Residue matrix over F_p; every entry lies in [0, p)."""

    entries: np.ndarray
    p: PrimeModulus
    band_meta: BandMeta | None = None

    def __post_init__(self) -> None:
        if self.entries.ndim != 2:
            raise ValueError("entries must be 2-dimensional")

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, eq=False)
class KernelBasis:
    """Canonical (reduced-echelon) basis of the right null space."""

    p: PrimeModulus
    dim: int
    vectors: np.ndarray  # (dim, n_cols) int64, rows in RREF


def reduce_mod(a: IntegerMatrix, p: PrimeModulus | int) -> FpMatrix:
    """Entrywise residue of an integer matrix, band metadata preserved."""
    pm = p if isinstance(p, PrimeModulus) else PrimeModulus(int(p))
    if pm.p >= (1 << 62):
        raise ValueError("modulus exceeds 62 bits")
    entries = np.mod(a.entries, np.int64(pm.p))
    return FpMatrix(entries, pm, band_meta=a.band_meta)


def _initial_spans(n_rows: int, n_cols: int, meta: BandMeta | None, banded: bool):
    """Per-row (first possible column, last possible column), inclusive."""
    if not banded or meta is None:
        lo = np.zeros(n_rows, dtype=np.int64)
        hi = np.full(n_rows, n_cols - 1, dtype=np.int64)
        return lo, hi
    idx = np.arange(n_rows, dtype=np.int64)
    d = meta.d
    lo = np.maximum(idx - d, 0)
    hi = np.minimum(idx + d, n_cols - 1)
    if meta.has_corners:
        n = max(n_rows, n_cols)
        corner = d if d < n else 0
        if corner:
            hi[:corner] = n_cols - 1   # top rows reach the right corner block
            lo[n_rows - corner:] = 0   # bottom rows reach the left corner block
    return lo, hi


def _forward_eliminate(m: np.ndarray, p: int, lo0: np.ndarray, hi: np.ndarray):
    """In-place row echelon pass; returns pivot (row, col) pairs in column order."""
    n_rows, n_cols = m.shape
    active = np.ones(n_rows, dtype=bool)
    pivots: list[tuple[int, int]] = []
    for j in range(n_cols):
        cand = np.nonzero(active & (lo0 <= j))[0]
        if cand.size == 0:
            continue
        col = m[cand, j]
        nz = np.nonzero(col != 0)[0]
        if nz.size == 0:
            continue
        pr = int(cand[nz[0]])
        pivots.append((pr, j))
        active[pr] = False
        rows = cand[nz[1:]]
        if rows.size == 0:
            continue
        w = int(hi[pr])
        inv = pow(int(m[pr, j]), -1, p)
        if m.dtype == object:
            factors = (m[rows, j] * inv) % p
        else:
            factors = (m[rows, j] * np.int64(inv)) % np.int64(p)
        piv = m[pr, j : w + 1]
        m[rows, j : w + 1] = (m[rows, j : w + 1] - factors[:, None] * piv[None, :]) % p
        hi[rows] = np.maximum(hi[rows], w)
    return pivots


def _back_substitute(m: np.ndarray, p: int, pivots, hi: np.ndarray, free_col: int):
    """Kernel vector with 1 at free_col and 0 at the other free columns."""
    n_cols = m.shape[1]
    x = np.zeros(n_cols, dtype=m.dtype)
    x[free_col] = 1
    for pr, pc in reversed(pivots):
        w = int(hi[pr])
        if w <= pc:
            continue
        seg = m[pr, pc + 1 : w + 1]
        xs = x[pc + 1 : w + 1]
        prods = (seg * xs) % p
        s = int(prods.sum()) % p
        if s:
            x[pc] = (-pow(int(m[pr, pc]), -1, p) * s) % p
    return x


def _rref_rows(rows: np.ndarray, p: int) -> np.ndarray:
    """Reduced row echelon form of a small row set (canonical basis)."""
    m = rows.copy()
    n_rows, n_cols = m.shape
    r = 0
    for j in range(n_cols):
        if r >= n_rows:
            break
        nz = np.nonzero(m[r:, j] != 0)[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            m[[r, pr]] = m[[pr, r]]
        inv = pow(int(m[r, j]), -1, p)
        m[r] = (m[r] * inv) % p
        others = [i for i in range(n_rows) if i != r and m[i, j] != 0]
        for i in others:
            m[i] = (m[i] - m[i, j] * m[r]) % p
        r += 1
    return m


def _as_work_array(a: FpMatrix) -> np.ndarray:
    if a.p.p <= _INT64_SAFE_P:
        return a.entries.astype(np.int64, copy=True)
    work = np.empty(a.entries.shape, dtype=object)
    work[...] = a.entries
    return work


def _eliminated(a: FpMatrix, banded: bool | None):
    use_band = a.band_meta is not None if banded is None else banded
    lo0, hi = _initial_spans(a.n_rows, a.n_cols, a.band_meta, use_band)
    work = _as_work_array(a)
    pivots = _forward_eliminate(work, a.p.p, lo0, hi)
    return work, pivots, hi


def rank_fp(a: FpMatrix, banded: bool | None = None) -> int:
    """Rank over F_p. ``banded=None`` follows band_meta; False forces dense."""
    _, pivots, _ = _eliminated(a, banded)
    return len(pivots)


def kernel_fp(a: FpMatrix, banded: bool | None = None) -> KernelBasis:
    """Canonical reduced basis of the right null space (dim = n_cols - rank)."""
    work, pivots, hi = _eliminated(a, banded)
    p = a.p.p
    pivot_cols = {c for _, c in pivots}
    free_cols = [j for j in range(a.n_cols) if j not in pivot_cols]
    if not free_cols:
        return KernelBasis(a.p, 0, np.zeros((0, a.n_cols), dtype=np.int64))
    rows = [_back_substitute(work, p, pivots, hi, f) for f in free_cols]
    basis = np.stack(rows).astype(object) if work.dtype == object else np.stack(rows)
    basis = _rref_rows(basis, p)
    return KernelBasis(a.p, len(free_cols), basis.astype(np.int64))


def is_singular_fp(a: FpMatrix, banded: bool | None = None) -> bool:
    """True iff a square matrix has rank < n over F_p."""
    if a.n_rows != a.n_cols:
        raise ValueError(f"singularity is for square matrices, got {a.n_rows}x{a.n_cols}")
    return rank_fp(a, banded) < a.n_rows


# ---------------------------------------------------------------------------
# Exact singularity over the integers via CRT
# ---------------------------------------------------------------------------

_crt_pool: list[int] = []


def _crt_primes(product_bound_sq: int) -> list[int]:
    """Distinct word-sized primes (descending from 2^61) whose squared
    product exceeds product_bound_sq."""
    sq = 1
    out = []
    for q in _crt_pool:
        out.append(q)
        sq *= q * q
        if sq > product_bound_sq:
            return out
    nxt = prev_prime((_crt_pool[-1] - 2) if _crt_pool else (1 << 61)).p
    while True:
        _crt_pool.append(nxt)
        out.append(nxt)
        sq *= nxt * nxt
        if sq > product_bound_sq:
            return out
        nxt = prev_prime(nxt - 2).p


def _det_zero_mod(rows: list[list[int]], p: int) -> bool:
    """Exact det == 0 test modulo p by scalar elimination on Python ints."""
    n = len(rows)
    m = [[x % p for x in r] for r in rows]
    for j in range(n):
        pr = None
        for i in range(j, n):
            if m[i][j]:
                pr = i
                break
        if pr is None:
            return True
        if pr != j:
            m[j], m[pr] = m[pr], m[j]
        inv = pow(m[j][j], -1, p)
        rj = m[j]
        for i in range(j + 1, n):
            f = m[i][j]
            if f:
                f = f * inv % p
                ri = m[i]
                for k in range(j, n):
                    ri[k] = (ri[k] - f * rj[k]) % p
    return False


def is_singular_Z(a: IntegerMatrix) -> bool:
    """Exact determinant-zero test over Z.

    Selects distinct primes below 2^61 whose product exceeds twice the
    Hadamard bound; det vanishes over Z iff it vanishes modulo every
    selected prime. A single prime never suffices on its own (e.g.
    det=4 would alias to 0 mod 2), which is exactly what the product
    bound rules out.
    """
    if a.n_rows != a.n_cols:
        raise ValueError("is_singular_Z is for square matrices")
    rows = [[int(x) for x in r] for r in a.entries]
    h_sq = 1
    for r in rows:
        s = sum(x * x for x in r)
        if s == 0:
            return True  # zero row
        h_sq *= s
    primes = _crt_primes(4 * h_sq)  # (prod p)^2 > (2H)^2 = 4 H^2
    for q in primes:
        if not _det_zero_mod(rows, q):
            return False
    return True
