import math
from fractions import Fraction

import numpy as np
import pytest

from bandlo.lotools import (
    BudgetExhausted,
    LOPreconditionError,
    LOWitness,
    StepLaw,
    WalkExactError,
    check_fourier_lemma,
    collision_estimate_rho,
    find_lo_witness,
    neighborhood,
    rho_mu,
    support_size,
    verify_witness,
    walk_distribution,
)
from bandlo.lotools import _walk_int64, _walk_limbs, _walk_sparse

from oracles import enumerate_walk, exhaustive_witness, oracle_neighborhood

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
ONE = Fraction(1)


def as_fraction_dict(mf):
    return {x: Fraction(num, 1 << mf.exponent) for x, num in mf.nonzero_items()}


# ---------------------------------------------------------------------------
# StepLaw
# ---------------------------------------------------------------------------

def test_step_law_validation():
    assert StepLaw(HALF).atoms == (2, 1)
    assert StepLaw(ONE).atoms == (0, 1)
    assert StepLaw(QUARTER).atoms == (6, 1)
    assert StepLaw(Fraction(3, 4)).atoms == (2, 3)
    with pytest.raises(ValueError):
        StepLaw(Fraction(1, 3))
    with pytest.raises(ValueError):
        StepLaw(Fraction(0))
    with pytest.raises(ValueError):
        StepLaw(Fraction(5, 4))


# ---------------------------------------------------------------------------
# walk_distribution: spec examples and the enumeration oracle
# ---------------------------------------------------------------------------

def test_walk_example_single_coordinate():
    mf = walk_distribution([1], StepLaw(HALF), 5)
    assert as_fraction_dict(mf) == {0: HALF, 1: QUARTER, 4: QUARTER}


def test_walk_example_wraparound():
    mf = walk_distribution([1, 2], StepLaw(ONE), 3)
    assert as_fraction_dict(mf) == {0: HALF, 1: QUARTER, 2: QUARTER}


def test_walk_example_spot_value():
    assert rho_mu([1, 2, 3], StepLaw(HALF), 101) == Fraction(5, 32)


def test_rho_examples():
    assert rho_mu([1, 1], StepLaw(ONE), 101) == HALF
    assert rho_mu([0, 0, 0], StepLaw(QUARTER), 17) == 1
    assert rho_mu([], StepLaw(QUARTER), 17) == 1


def test_walk_matches_enumeration_exhaustive_small():
    for p in (3, 5, 17):
        for mu in (ONE, HALF, QUARTER):
            law = StepLaw(mu)
            for d in (1, 2):
                for code in range(5 ** d):
                    v = [(code // 5 ** i) % 5 for i in range(d)]
                    mf = walk_distribution(v, law, p)
                    assert as_fraction_dict(mf) == {
                        x: pr for x, pr in enumerate_walk(v, mu, p).items() if pr > 0
                    }, (p, mu, v)


def test_walk_matches_enumeration_random():
    rng = np.random.default_rng(0)
    for _ in range(150):
        d = int(rng.integers(3, 9))
        p = int(rng.choice([3, 5, 17, 101]))
        mu = [ONE, HALF, QUARTER][int(rng.integers(3))]
        v = rng.integers(0, 5, size=d).tolist()
        mf = walk_distribution(v, StepLaw(mu), p)
        expect = {x: pr for x, pr in enumerate_walk(v, mu, p).items() if pr > 0}
        assert as_fraction_dict(mf) == expect, (p, mu, v)


def test_exact_storage_tiers_agree():
    rng = np.random.default_rng(1)
    law = StepLaw(HALF)
    for _ in range(20):
        d = int(rng.integers(4, 16))
        p = int(rng.choice([17, 101, 257]))
        v = rng.integers(1, p, size=d)
        a = _walk_int64(v, law, p)
        b = _walk_limbs(v, law, p)
        da, db = dict(a.nonzero_items()), dict(b.nonzero_items())
        assert da == db
        assert a.exponent == b.exponent
    # sparse leg in its own regime: support must stay under p/4
    for _ in range(10):
        d = int(rng.integers(3, 8))
        p = 10007
        v = rng.integers(1, p, size=d)
        a = _walk_int64(v, law, p)
        c = _walk_sparse(v, law, p)
        assert dict(a.nonzero_items()) == dict(c.nonzero_items())
        assert a.exponent == c.exponent


def test_mass_sums_to_one_exactly():
    rng = np.random.default_rng(2)
    for _ in range(30):
        d = int(rng.integers(1, 12))
        p = int(rng.choice([5, 31, 101]))
        law = StepLaw([ONE, HALF, QUARTER][int(rng.integers(3))])
        v = rng.integers(0, p, size=d)
        mf = walk_distribution(v, law, p)
        assert mf.total_num() == 1 << mf.exponent


def test_permutation_invariance():
    law = StepLaw(QUARTER)
    a = walk_distribution([1, 2, 3, 4], law, 31)
    b = walk_distribution([4, 2, 3, 1], law, 31)
    assert dict(a.nonzero_items()) == dict(b.nonzero_items())


def test_unit_scaling_invariance():
    law = StepLaw(QUARTER)
    p = 31
    v = [1, 2, 5, 9]
    u = 7
    assert rho_mu(v, law, p) == rho_mu([u * x % p for x in v], law, p)
    nb = neighborhood(v, law, p)
    nb_scaled = neighborhood([u * x % p for x in v], law, p)
    assert sorted(u * int(x) % p for x in nb) == list(nb_scaled)


def test_zero_coordinates_are_neutral():
    law = StepLaw(HALF)
    a = walk_distribution([1, 2, 3], law, 11)
    b = walk_distribution([1, 0, 2, 0, 3, 11], law, 11)
    assert dict(a.nonzero_items()) == dict(b.nonzero_items())
    assert support_size([1, 0, 5], 5) == 1
    assert support_size([0, 0, 0], 7) == 0
    assert support_size([1, 2, 3], 7) == 3


def test_argmax_is_zero_for_lazy_walks():
    # mu <= 1/2: the walk is maximal at 0
    rng = np.random.default_rng(3)
    for _ in range(60):
        d = int(rng.integers(1, 10))
        p = int(rng.choice([5, 17, 101]))
        law = StepLaw([HALF, QUARTER, Fraction(1, 8)][int(rng.integers(3))])
        v = rng.integers(0, p, size=d)
        mf = walk_distribution(v, law, p)
        assert mf.mass_num(0) == mf._max_num()[0]


def test_rho_lower_bound_lazy_mass():
    rng = np.random.default_rng(4)
    for _ in range(40):
        d = int(rng.integers(1, 14))
        p = 101
        mu = [HALF, QUARTER][int(rng.integers(2))]
        v = rng.integers(0, p, size=d)
        assert rho_mu(v, StepLaw(mu), p) >= (1 - mu) ** d


def test_float_mode_agrees_within_error_bound():
    rng = np.random.default_rng(5)
    for _ in range(25):
        d = int(rng.integers(1, 17))
        p = int(rng.choice([17, 101, 257]))
        mu = [ONE, HALF, QUARTER][int(rng.integers(3))]
        v = rng.integers(0, p, size=d)
        exact = walk_distribution(v, StepLaw(mu), p).float_masses()
        approx = walk_distribution(v, StepLaw(mu), p, mode="float")
        assert np.max(np.abs(exact - approx.float_masses())) <= approx.err_bound + 1e-17


def test_sparse_mode_and_support_ceiling():
    law = StepLaw(HALF)
    p = (1 << 22) + 15  # beyond the dense threshold, forcing the sparse path
    mf = walk_distribution([1, 5, 11], law, p)
    expect = {x: pr for x, pr in enumerate_walk([1, 5, 11], HALF, p).items() if pr > 0}
    assert as_fraction_dict(mf) == expect
    # support saturation past p/4 refuses exact mode (collision estimator territory)
    rng = np.random.default_rng(6)
    big = rng.integers(1, p, size=30)
    with pytest.raises(WalkExactError):
        walk_distribution(big, law, p)


# ---------------------------------------------------------------------------
# neighborhoods
# ---------------------------------------------------------------------------

def test_neighborhood_examples():
    assert neighborhood([1], StepLaw(QUARTER), 7).tolist() == [0]
    assert neighborhood([1], StepLaw(ONE), 7).tolist() == list(range(7))  # P(0)=0 edge
    assert neighborhood([], StepLaw(QUARTER), 7).tolist() == [0]


def test_neighborhood_exact_ties_included():
    # w=(1,1), mu=1: P(0)=1/2, P(+-2)=1/4 = exactly half: ties are in
    nb = neighborhood([1, 1], StepLaw(ONE), 11)
    assert nb.tolist() == [0, 2, 9]


def test_neighborhood_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(80):
        d = int(rng.integers(1, 7))
        p = int(rng.choice([5, 17, 31]))
        mu = [ONE, HALF, QUARTER][int(rng.integers(3))]
        w = rng.integers(0, p, size=d).tolist()
        assert set(neighborhood(w, StepLaw(mu), p).tolist()) == oracle_neighborhood(w, mu, p)


# ---------------------------------------------------------------------------
# witness machinery
# ---------------------------------------------------------------------------

def test_witness_all_equal_family():
    law = StepLaw(QUARTER)
    wit = find_lo_witness([1] * 12, law, 1009)
    assert wit is not None
    assert verify_witness([1] * 12, law, 1009, wit)
    assert len(wit.indices) <= wit.budget
    assert len(wit.exceptional) <= wit.budget


def test_witness_refuses_large_mu():
    with pytest.raises(ValueError):
        find_lo_witness([1] * 12, StepLaw(HALF), 1009)


def test_witness_preconditions():
    law = StepLaw(QUARTER)
    # generic vector: rho < 2/p fails the anti-concentration hypothesis
    rng = np.random.default_rng(8)
    v = rng.integers(1, 1009, size=18)
    with pytest.raises(LOPreconditionError):
        find_lo_witness(v, law, 1009)
    # short support: |v| < D
    with pytest.raises(LOPreconditionError):
        find_lo_witness([1, 1, 0, 0], law, 101)


def test_witness_budget_exhaustion_is_distinguished():
    law = StepLaw(QUARTER)
    with pytest.raises(BudgetExhausted):
        find_lo_witness([1] * 12, law, 1009, budget=1)


def test_witness_tamper_detection():
    law = StepLaw(QUARTER)
    v = [3] * 13 + [0]
    wit = find_lo_witness(v, law, 509)
    assert wit is not None and verify_witness(v, law, 509, wit)
    if wit.exceptional:
        tampered = LOWitness(wit.indices, wit.w, wit.neighborhood,
                             wit.exceptional[1:], wit.budget, wit.rho, wit.log_base)
    else:
        tampered = LOWitness(wit.indices, wit.w, wit.neighborhood,
                             (0,) + wit.exceptional, wit.budget, wit.rho, wit.log_base)
    assert not verify_witness(v, law, 509, tampered)
    wrong_n = LOWitness(wit.indices, wit.w, wit.neighborhood[:-1],
                        wit.exceptional, wit.budget, wit.rho, wit.log_base)
    assert not verify_witness(v, law, 509, wrong_n)


def test_witness_agrees_with_exhaustive_oracle():
    law = StepLaw(QUARTER)
    rng = np.random.default_rng(9)
    checked = 0
    while checked < 6:
        p = int(rng.choice([101, 257, 509]))
        c = int(rng.integers(1, p))
        v = [c] * 12
        oracle = exhaustive_witness(v, QUARTER, p)
        assert oracle is not None
        t_set, nb, exceptional, big_d, rho = oracle
        wit = LOWitness(
            indices=tuple(t_set),
            w=tuple(v[i] % p for i in t_set),
            neighborhood=tuple(sorted(nb)),
            exceptional=tuple(exceptional),
            budget=big_d,
            rho=rho,
            log_base=math.e,
        )
        assert verify_witness(v, law, p, wit)  # the oracle's T is accepted
        ours = find_lo_witness(v, law, p)
        assert ours is not None and verify_witness(v, law, p, ours)
        checked += 1


# ---------------------------------------------------------------------------
# Fourier comparison lemma
# ---------------------------------------------------------------------------

def test_fourier_lemma_identity_comparison():
    res = check_fourier_lemma([2] * 16, Fraction(1), StepLaw(QUARTER), 1009,
                              nu_grid=(HALF, QUARTER), K=8)
    assert res.nu is not None
    assert res.ratio <= 1


def test_fourier_lemma_all_ones_20():
    res = check_fourier_lemma([1] * 20, HALF, StepLaw(QUARTER), 1009, K=8)
    assert res.nu is not None
    assert res.ratio <= HALF


def test_fourier_lemma_preconditions():
    with pytest.raises(LOPreconditionError):
        check_fourier_lemma([1] * 4, HALF, StepLaw(QUARTER), 1009, K=8)  # |v| < K
    rng = np.random.default_rng(10)
    v = rng.integers(1, 101, size=40)  # generic: rho ~ 1/p < 2d/p
    with pytest.raises(LOPreconditionError):
        check_fourier_lemma(v, HALF, StepLaw(QUARTER), 101, K=8)


# ---------------------------------------------------------------------------
# collision estimator
# ---------------------------------------------------------------------------

def test_collision_estimator_degenerate():
    est = collision_estimate_rho([0, 0, 0], StepLaw(HALF), 10007, 5000, seed=0)
    assert est.lower <= 1.0 <= est.upper
    assert est.q_hat == 1.0


def test_collision_estimator_known_values():
    est = collision_estimate_rho([1, 1], StepLaw(ONE), 100003, 100000, seed=1)
    assert est.lower <= 0.5 <= est.upper
    est = collision_estimate_rho([1, 2, 3], StepLaw(HALF), 101, 100000, seed=2)
    assert est.lower <= float(Fraction(5, 32)) <= est.upper


def test_collision_estimator_deterministic():
    a = collision_estimate_rho([1, 2, 3], StepLaw(HALF), 101, 20000, seed=3)
    b = collision_estimate_rho([1, 2, 3], StepLaw(HALF), 101, 20000, seed=3)
    assert a == b
