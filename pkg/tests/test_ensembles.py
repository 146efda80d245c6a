from fractions import Fraction

import numpy as np
import pytest

from bandlo.ensembles import (
    BandProfile,
    IntegerMatrix,
    IntervalPartition,
    OffbandLaw,
    diagonal_block,
    extract_comparison_matrix,
    lower_block,
    partition_intervals,
    row_context,
    sample_matrix,
    upper_block,
    zero_row,
)
from bandlo.rankengine import kernel_fp, reduce_mod


def support_predicate(kind, n, d, i, j):
    dist = abs(i - j)
    if kind == "general":
        return dist <= d
    if kind == "periodic":
        return dist <= d or dist >= n - d
    if kind == "modified":
        return dist < d
    m = n // d
    bi, bj = i // d, j // d
    return abs(bi - bj) <= 1 or {bi, bj} == {0, m - 1} or (m == 1)


@pytest.mark.parametrize("kind", ["general", "periodic", "modified", "block"])
def test_support_matches_predicate_everywhere(kind):
    for n in (4, 8, 12, 24, 33, 64):
        ds = [d for d in (1, 2, 3, 5, 8, n // 2, n) if 1 <= d <= n]
        if kind == "block":
            ds = [d for d in ds if n % d == 0]
        for d in ds:
            profile = BandProfile(n=n, d=d, kind=kind)
            a = sample_matrix(profile, seed=n * 1000 + d)
            for i in range(n):
                for j in range(n):
                    inside = support_predicate(kind, n, d, i, j)
                    if inside:
                        assert a.entries[i, j] in (-1, 1), (kind, n, d, i, j)
                    else:
                        assert a.entries[i, j] == 0, (kind, n, d, i, j)
            assert a.check_band_meta()


def test_general_full_band_is_iid_pm1():
    a = sample_matrix(BandProfile(n=3, d=3, kind="general"), seed=0)
    assert np.all(np.abs(a.entries) == 1)


def test_periodic_example_n8_d1():
    a = sample_matrix(BandProfile(n=8, d=1, kind="periodic"), seed=1)
    assert a.entries[0, 3] == 0
    assert a.entries[0, 7] != 0 and a.entries[7, 0] != 0


def test_modified_example_diagonal_only():
    a = sample_matrix(BandProfile(n=8, d=1, kind="modified"), seed=1)
    assert np.array_equal(a.entries != 0, np.eye(8, dtype=bool))


def test_sampling_determinism_and_seed_sensitivity():
    profile = BandProfile(n=16, d=4, kind="periodic")
    a = sample_matrix(profile, seed=42)
    b = sample_matrix(profile, seed=42)
    assert np.array_equal(a.entries, b.entries)
    diffs = sum(
        not np.array_equal(sample_matrix(profile, s).entries,
                           sample_matrix(profile, s + 1).entries)
        for s in range(50)
    )
    assert diffs == 50


def test_entry_sign_balance_chi_square():
    # 1e5 on-band samples, balance at the 1e-3 level (1 dof: 10.828)
    a = sample_matrix(BandProfile(n=317, d=316, kind="general"), seed=9)
    signs = a.entries[np.abs(np.subtract.outer(np.arange(317), np.arange(317))) <= 316]
    signs = signs[:100000]
    pos = int((signs == 1).sum())
    n = len(signs)
    chi2 = (pos - n / 2) ** 2 / (n / 4)
    assert n == 100000
    assert chi2 < 10.828


def test_offband_laws():
    rad = sample_matrix(
        BandProfile(n=10, d=2, kind="general", offband=OffbandLaw.rademacher()), seed=3)
    off = np.abs(np.subtract.outer(np.arange(10), np.arange(10))) > 2
    assert np.all(np.abs(rad.entries[off]) == 1)
    assert rad.band_meta is None

    uni = sample_matrix(
        BandProfile(n=12, d=2, kind="general", offband=OffbandLaw.uniform_range(-3, 5)),
        seed=4)
    off = np.abs(np.subtract.outer(np.arange(12), np.arange(12))) > 2
    vals = uni.entries[off]
    assert vals.min() >= -3 and vals.max() <= 5

    const = sample_matrix(
        BandProfile(n=9, d=1, kind="general", offband=OffbandLaw.constant(7)), seed=5)
    off = np.abs(np.subtract.outer(np.arange(9), np.arange(9))) > 1
    assert np.all(const.entries[off] == 7)


def test_block_requires_divisibility():
    with pytest.raises(ValueError):
        BandProfile(n=10, d=3, kind="block")


def test_offband_only_for_general():
    with pytest.raises(ValueError):
        BandProfile(n=8, d=2, kind="periodic", offband=OffbandLaw.rademacher())


# ---------------------------------------------------------------------------
# interval partition
# ---------------------------------------------------------------------------

def test_partition_example_13_8():
    part = partition_intervals(13, 8)
    assert part.e == 2
    assert part.intervals == ((0, 2), (2, 4), (4, 6), (6, 8), (8, 10), (10, 12), (12, 13))
    assert not part.fallback
    assert part.m == 13 // 2 + 1


def test_partition_example_10_10():
    part = partition_intervals(10, 10)
    assert part.intervals == ((0, 4), (4, 8), (8, 10))
    assert part.e == 4


def test_partition_example_100_15():
    # the spec's contract: invariants hold or the fallback flag is set
    part = partition_intervals(100, 15)
    _assert_partition_invariants(part)


def _assert_partition_invariants(part: IntervalPartition):
    covered = []
    for lo, hi in part.intervals:
        covered.extend(range(lo, hi))
    assert covered == list(range(part.n))
    bodies = part.intervals[:-1]
    assert all(hi - lo == part.e for lo, hi in bodies)
    last = part.intervals[-1]
    if part.fallback:
        assert part.e <= last[1] - last[0] < 2 * part.e
    else:
        assert 2 * (last[1] - last[0]) >= part.e
        assert part.m == part.n // part.e + 1


def test_partition_invariants_random():
    import random

    rng = random.Random(0)
    for _ in range(200):
        n = rng.randint(8, 300)
        d = rng.randint(3, n)
        part = partition_intervals(n, d)
        _assert_partition_invariants(part)


def test_partition_small_bandwidth_errors():
    with pytest.raises(ValueError):
        partition_intervals(20, 2)
    with pytest.raises(ValueError):
        partition_intervals(7, 5)   # n < 8
    part = partition_intervals(20, 3)   # e = 1 everywhere: singleton fallback
    assert part.e == 1
    assert part.fallback


def test_partition_block_length_is_exact_floor():
    # e must be the exact rational floor of d/s (21/2.1 is 10, though the
    # binary double for 2.1 makes the float quotient 9.999...)
    part = partition_intervals(65, 21)
    assert part.e == (21 * part.s.denominator) // part.s.numerator
    assert part.e == 10
    assert not part.fallback


def test_row_context():
    part = partition_intervals(13, 8)
    ctx = row_context(part, 12)
    assert ctx.block == part.m - 1
    ctx = row_context(part, 0)
    assert ctx.block == 0
    lo, hi = part.intervals[ctx.block]
    assert lo <= ctx.index < hi


# ---------------------------------------------------------------------------
# zero_row and the comparison matrix
# ---------------------------------------------------------------------------

def test_zero_row_examples():
    ident = IntegerMatrix(np.eye(3, dtype=np.int64))
    z = zero_row(ident, 1)
    assert z.entries.tolist() == [[1, 0, 0], [0, 0, 0], [0, 0, 1]]
    ones = IntegerMatrix(np.ones((2, 2), dtype=np.int64))
    assert zero_row(ones, 0).entries.tolist() == [[0, 0], [1, 1]]
    # rank bound: kernel dim >= 1 after zeroing a row
    kb = kernel_fp(reduce_mod(zero_row(ident, 1), 5))
    assert kb.dim >= 1
    with pytest.raises(IndexError):
        zero_row(ident, 3)


def _manual_partition(n, e):
    full = n // e
    ivs = [(k * e, (k + 1) * e) for k in range(full)]
    if full * e < n:
        ivs.append((full * e, n))
    return IntervalPartition(n=n, e=e, s=Fraction(5, 2), intervals=tuple(ivs))


def test_comparison_matrix_all_ones_example():
    a = IntegerMatrix(np.ones((6, 6), dtype=np.int64))
    part = _manual_partition(6, 2)
    ctx = row_context(part, 0)
    d_mat = extract_comparison_matrix(a, part, ctx)
    assert np.all(d_mat.entries[0, :] == 0)            # zeroed row
    assert d_mat.entries[4, 0] == 0                    # outside the tri-block band
    assert d_mat.entries[2, 1] == 1                    # in T_1 (rows of block 1, cols of block 0)


def test_comparison_matrix_vs_zero_row_on_block_kind():
    profile = BandProfile(n=12, d=3, kind="block")
    a = sample_matrix(profile, seed=8)
    part = _manual_partition(12, 3)
    ctx = row_context(part, 5)
    d_mat = extract_comparison_matrix(a, part, ctx)
    z = zero_row(a, 5)
    diff = d_mat.entries != z.entries
    # differences live exactly in the wrap-around corner tiles
    corner = np.zeros((12, 12), dtype=bool)
    corner[0:3, 9:12] = True
    corner[9:12, 0:3] = True
    assert diff[~corner].sum() == 0
    assert diff[corner].any()


def test_comparison_matrix_single_interval_equals_zero_row():
    a = IntegerMatrix(np.arange(16, dtype=np.int64).reshape(4, 4))
    part = IntervalPartition(n=4, e=4, s=Fraction(5, 2), intervals=((0, 4),))
    ctx = row_context(part, 2)
    d_mat = extract_comparison_matrix(a, part, ctx)
    assert np.array_equal(d_mat.entries, zero_row(a, 2).entries)


def test_block_accessors():
    a = IntegerMatrix(np.arange(36, dtype=np.int64).reshape(6, 6))
    part = _manual_partition(6, 2)
    assert np.array_equal(diagonal_block(a, part, 1), a.entries[2:4, 2:4])
    assert np.array_equal(upper_block(a, part, 1), a.entries[0:2, 2:4])
    assert np.array_equal(lower_block(a, part, 1), a.entries[4:6, 2:4])
    with pytest.raises(IndexError):
        upper_block(a, part, 0)
    with pytest.raises(IndexError):
        lower_block(a, part, 2)
