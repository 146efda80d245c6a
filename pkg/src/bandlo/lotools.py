"""Littlewood-Offord machinery on Z_p: lazy-walk distributions, concentration,
neighborhoods, and an inverse witness finder.

The walk attached to a vector v is X = eps_1 v_1 + ... + eps_d v_d on Z_p,
with i.i.d. steps eps_i in {-1, 0, 1}, P(eps = +1) = P(eps = -1) = mu/2.
Because mu is dyadic, every mass is an integer multiple of a power of two,
and the exact representations below store numerators over the shared
denominator 2**exponent.

Exact storage tiers (chosen automatically):
  * dense int64 numerators, when step_bits * |v| <= 62;
  * dense base-2^32 limb arrays with lazy carries, beyond int64 range;
  * sparse dicts of Python-int numerators, when p exceeds the dense
    threshold (with a support ceiling of p/4 — past that, exact mode is
    refused and the collision estimator is the intended tool).

Float mode is plain binary64 with a tracked additive error bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fieldcore import PrimeModulus, is_prime
from .rng import derive_key, hash_counters
from .statutil import Z_99, wilson_interval

__all__ = [
    "StepLaw",
    "MassFunction",
    "LOWitness",
    "RhoEstimate",
    "FourierLemmaResult",
    "WalkExactError",
    "LOPreconditionError",
    "BudgetExhausted",
    "walk_distribution",
    "rho_mu",
    "support_size",
    "neighborhood",
    "find_lo_witness",
    "verify_witness",
    "check_fourier_lemma",
    "collision_estimate_rho",
]

DEFAULT_DENSE_THRESHOLD = 1 << 22

_PAYLOAD = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)


class WalkExactError(RuntimeError):
    """Exact mode is infeasible at this (p, support) scale."""


class LOPreconditionError(ValueError):
    """The hypotheses of the inverse theorem / lemma are not met."""


class BudgetExhausted(RuntimeError):
    """The witness search ran out of its evaluation budget."""


@dataclass(frozen=True)
class StepLaw:
    """Lazy sign step with dyadic mu in (0, 1].

    P(+1) = P(-1) = mu/2 and P(0) = 1 - mu. The canonical grid is
    {1, 1/2, 1/4, 1/8, 1/16} but any dyadic mu works.
    """

    mu: Fraction

    def __post_init__(self) -> None:
        mu = Fraction(self.mu)
        object.__setattr__(self, "mu", mu)
        if not (0 < mu <= 1):
            raise ValueError(f"mu must lie in (0, 1], got {mu}")
        if mu.denominator & (mu.denominator - 1):
            raise ValueError(f"mu must be dyadic, got {mu}")

    @property
    def k(self) -> int:
        """log2 of mu's denominator."""
        return self.mu.denominator.bit_length() - 1

    @property
    def step_bits(self) -> int:
        """Denominator growth per convolution step: atoms live over 2^(k+1)."""
        return self.k + 1

    @property
    def atoms(self) -> tuple[int, int]:
        """(a0, a1): integer weights of {0} and {+1}/{-1} over 2^(k+1)."""
        a1 = self.mu.numerator  # mu/2 = num / 2^(k+1)
        a0 = (1 << (self.k + 1)) - 2 * a1
        return a0, a1


def _residues(v, p: int) -> np.ndarray:
    arr = np.asarray(v, dtype=np.int64).reshape(-1)
    return np.mod(arr, np.int64(p))


def support_size(v, p: PrimeModulus | int) -> int:
    """Number of coordinates that are nonzero mod p."""
    return int(np.count_nonzero(_residues(v, int(p))))


# ---------------------------------------------------------------------------
# MassFunction
# ---------------------------------------------------------------------------

class MassFunction:
    """Distribution of a walk on Z_p.

    Exact instances expose integer numerators over 2**exponent; float
    instances expose binary64 masses with `err_bound` on each mass.
    """

    def __init__(self, p, mode, exponent=None, num=None, limbs=None,
                 sparse=None, probs=None, err_bound=0.0):
        self.p = int(p)
        self.mode = mode
        self.exponent = exponent
        self._num = num          # int64 ndarray, or None
        self._limbs = limbs      # (L, p) uint64 normalized, or None
        self._sparse = sparse    # dict residue -> int numerator, or None
        self._probs = probs      # float64 ndarray, or None
        self.err_bound = err_bound

    # -- exact accessors ----------------------------------------------------

    def mass_num(self, x: int) -> int:
        """Exact numerator of P(X = x) over 2**exponent."""
        x %= self.p
        if self._num is not None:
            return int(self._num[x])
        if self._limbs is not None:
            return _limb_value(self._limbs, x)
        if self._sparse is not None:
            return self._sparse.get(x, 0)
        raise WalkExactError("float-mode mass function has no exact numerators")

    def mass(self, x: int) -> Fraction | float:
        if self.mode == "float":
            return float(self._probs[x % self.p])
        return Fraction(self.mass_num(x), 1 << self.exponent)

    def rho(self) -> Fraction | float:
        """Largest point mass."""
        if self.mode == "float":
            return float(self._probs.max())
        num, _ = self._max_num()
        return Fraction(num, 1 << self.exponent)

    def argmax(self) -> int:
        """Smallest residue achieving the maximal mass."""
        if self.mode == "float":
            return int(np.argmax(self._probs))
        return self._max_num()[1]

    def _max_num(self) -> tuple[int, int]:
        if self._num is not None:
            arg = int(np.argmax(self._num))
            return int(self._num[arg]), arg
        if self._limbs is not None:
            return _limb_max(self._limbs)
        best = max(self._sparse.values())
        arg = min(x for x, n in self._sparse.items() if n == best)
        return best, arg

    def total_num(self) -> int:
        """Sum of all numerators; equals 2**exponent for a sound pmf."""
        if self._num is not None:
            return int(self._num.sum(dtype=object))
        if self._limbs is not None:
            return _limb_total(self._limbs)
        return sum(self._sparse.values())

    def neighborhood(self) -> np.ndarray:
        """Residues x with P(X = x) >= P(X = 0)/2, ascending (exact ties in)."""
        if self.mode == "float":
            raise WalkExactError("neighborhood requires an exact mass function")
        if self._num is not None:
            # 2*num >= t  <=>  num >= ceil(t/2), avoiding int64 overflow
            thr = (int(self._num[0]) + 1) // 2
            return np.nonzero(self._num >= thr)[0].astype(np.int64)
        if self._limbs is not None:
            return _limb_neighborhood(self._limbs)
        t = self._sparse.get(0, 0)
        if t == 0:
            return np.arange(self.p, dtype=np.int64)  # every residue qualifies
        members = sorted(x for x, n in self._sparse.items() if 2 * n >= t)
        return np.array(members, dtype=np.int64)

    def nonzero_items(self):
        """Yield (residue, numerator) with numerator > 0, ascending residue."""
        if self.mode == "float":
            raise WalkExactError("exact items require an exact mass function")
        if self._num is not None:
            for x in np.nonzero(self._num)[0]:
                yield int(x), int(self._num[x])
        elif self._limbs is not None:
            mask = (self._limbs != 0).any(axis=0)
            for x in np.nonzero(mask)[0]:
                yield int(x), _limb_value(self._limbs, int(x))
        else:
            for x in sorted(self._sparse):
                if self._sparse[x]:
                    yield x, self._sparse[x]

    def float_masses(self) -> np.ndarray:
        if self.mode == "float":
            return self._probs.copy()
        if self._num is not None:
            return self._num.astype(np.float64) * math.ldexp(1.0, -self.exponent)
        if self._limbs is not None:
            out = np.zeros(self.p, dtype=np.float64)
            for k in range(self._limbs.shape[0]):
                out += self._limbs[k].astype(np.float64) * math.ldexp(1.0, 32 * k - self.exponent)
            return out
        out = np.zeros(self.p, dtype=np.float64)
        for x, numv in self.nonzero_items():
            out[x] = _big_ratio(numv, self.exponent)
        return out

    def dyadic_bucket(self) -> int:
        """t with rho in [2^-t, 2^-t+1); exact-mode only."""
        num, _ = self._max_num()
        red = Fraction(num, 1 << self.exponent)
        return red.denominator.bit_length() - 1 - (red.numerator.bit_length() - 1)


def _big_ratio(num: int, exponent: int) -> float:
    """num / 2**exponent as a correctly rounded float (ratio is <= 1)."""
    if num == 0:
        return 0.0
    return float(Fraction(num, 1 << exponent))


# -- limb helpers (base 2^32 payload stored in uint64) ----------------------

def _limb_value(limbs: np.ndarray, x: int) -> int:
    out = 0
    for k in range(limbs.shape[0] - 1, -1, -1):
        out = (out << 32) | int(limbs[k, x])
    return out


def _limb_total(limbs: np.ndarray) -> int:
    total = 0
    for k in range(limbs.shape[0]):
        # column values < 2^32 and p <= 2^22 keeps the uint64 sum exact
        total += int(limbs[k].sum(dtype=np.uint64)) << (32 * k)
    return total


def _limb_max(limbs: np.ndarray) -> tuple[int, int]:
    cand = np.arange(limbs.shape[1])
    for k in range(limbs.shape[0] - 1, -1, -1):
        vals = limbs[k, cand]
        m = vals.max()
        cand = cand[vals == m]
        if cand.size == 1:
            break
    arg = int(cand[0])
    return _limb_value(limbs, arg), arg


def _limb_neighborhood(limbs: np.ndarray) -> np.ndarray:
    L, p = limbs.shape
    # doubled masses: u = 2 * num, one extra limb for the carry out
    u = np.zeros((L + 1, p), dtype=np.uint64)
    u[:L] = (limbs << np.uint64(1)) & _PAYLOAD
    u[1 : L + 1] |= limbs >> np.uint64(31)
    t = _limb_value(limbs, 0)
    tl = np.array([(t >> (32 * k)) & 0xFFFFFFFF for k in range(L + 1)], dtype=np.uint64)
    gt = np.zeros(p, dtype=bool)
    lt = np.zeros(p, dtype=bool)
    undecided = np.ones(p, dtype=bool)
    for k in range(L, -1, -1):
        a = u[k]
        gt |= undecided & (a > tl[k])
        lt |= undecided & (a < tl[k])
        undecided &= a == tl[k]
    ge = gt | undecided
    return np.nonzero(ge)[0].astype(np.int64)


# ---------------------------------------------------------------------------
# walk_distribution
# ---------------------------------------------------------------------------

def walk_distribution(v, law: StepLaw, p: PrimeModulus | int, mode: str = "exact",
                      dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> MassFunction:
    """Exact (or float) pmf of the walk X(v) on Z_p by iterated convolution.

    Zero coordinates never move the walk and are skipped exactly; the
    shared denominator is 2**(step_bits * support).
    """
    pi = int(p)
    if pi < 1:
        raise ValueError("modulus must be positive")
    coords = _residues(v, pi)
    nz = coords[coords != 0]
    if mode == "float":
        if pi > dense_threshold:
            raise WalkExactError(
                f"p={pi} exceeds the dense threshold {dense_threshold}")
        return _walk_float(nz, law, pi)
    if mode != "exact":
        raise ValueError(f"mode must be 'exact' or 'float', got {mode!r}")
    if pi > dense_threshold:
        return _walk_sparse(nz, law, pi)
    exponent = law.step_bits * len(nz)
    if exponent <= 62:
        return _walk_int64(nz, law, pi)
    return _walk_limbs(nz, law, pi)


def _walk_int64(nz: np.ndarray, law: StepLaw, p: int) -> MassFunction:
    a0, a1 = law.atoms
    num = np.zeros(p, dtype=np.int64)
    num[0] = 1
    for c in nz:
        c = int(c)
        up = np.roll(num, c)
        dn = np.roll(num, -c)
        num = a0 * num + a1 * (up + dn)
    return MassFunction(p, "exact", exponent=law.step_bits * len(nz), num=num)


def _walk_limbs(nz: np.ndarray, law: StepLaw, p: int) -> MassFunction:
    a0, a1 = law.atoms
    sb = law.step_bits
    if sb > 20:
        raise WalkExactError(
            f"step denominator 2^{sb} too fine for the limb representation")
    bits = sb * len(nz) + 1
    l_max = (bits + 31) // 32 + 1
    x = np.zeros((l_max, p), dtype=np.uint64)
    x[0, 0] = 1
    up = np.empty_like(x)
    dn = np.empty_like(x)
    a0u, a1u = np.uint64(a0), np.uint64(a1)
    live = 1          # limbs currently in use
    grown = sb        # value-bound bits accumulated so far
    slack = 31        # headroom bits left in the top payload before a carry pass
    for c in nz:
        c = int(c)
        up[:live, :c] = x[:live, p - c :]
        up[:live, c:] = x[:live, : p - c]
        dn[:live, : p - c] = x[:live, c:]
        dn[:live, p - c :] = x[:live, :c]
        if a0 == 0:
            np.add(up[:live], dn[:live], out=x[:live])
        else:
            np.add(up[:live], dn[:live], out=up[:live])
            up[:live] *= a1u
            x[:live] *= a0u
            x[:live] += up[:live]
        grown += sb
        slack -= sb + 1
        if slack <= sb + 2:
            live = _limb_carry(x, live, grown)
            slack = 31
    _limb_carry(x, l_max, bits)
    top = int(np.max(np.nonzero((x != 0).any(axis=1))[0], initial=0))
    return MassFunction(p, "exact", exponent=sb * len(nz), limbs=x[: top + 1].copy())


def _limb_carry(x: np.ndarray, live: int, bound_bits: int) -> int:
    """One ascending carry pass; returns the new live limb count."""
    l_max = x.shape[0]
    need = min(l_max, bound_bits // 32 + 2)
    live = max(live, 1)
    k = 0
    while k < l_max - 1:
        carry = x[k] >> _SHIFT32
        if k >= live and not carry.any():
            break
        x[k] &= _PAYLOAD
        x[k + 1] += carry
        k += 1
    return min(max(live, need), l_max)


def _walk_sparse(nz: np.ndarray, law: StepLaw, p: int) -> MassFunction:
    a0, a1 = law.atoms
    cap = p // 4
    masses = {0: 1}
    for c in nz:
        c = int(c)
        out: dict[int, int] = {}
        for x, w in masses.items():
            if a0:
                out[x] = out.get(x, 0) + a0 * w
            y = x + c
            if y >= p:
                y -= p
            out[y] = out.get(y, 0) + a1 * w
            y = x - c
            if y < 0:
                y += p
            out[y] = out.get(y, 0) + a1 * w
        masses = out
        if len(masses) > cap:
            raise WalkExactError(
                f"support {len(masses)} exceeded p/4 = {cap} in sparse exact mode; "
                "use collision_estimate_rho for this scale")
    return MassFunction(p, "exact", exponent=law.step_bits * len(nz), sparse=masses)


def _walk_float(nz: np.ndarray, law: StepLaw, p: int) -> MassFunction:
    a0f = float(1 - law.mu)
    a1f = float(law.mu / 2)
    probs = np.zeros(p, dtype=np.float64)
    probs[0] = 1.0
    for c in nz:
        c = int(c)
        probs = a0f * probs + a1f * (np.roll(probs, c) + np.roll(probs, -c))
    err = 5.0 * len(nz) * 2.0 ** -53
    return MassFunction(p, "float", probs=probs, err_bound=err)


def rho_mu(v, law: StepLaw, p: PrimeModulus | int, mode: str = "exact",
           dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> Fraction | float:
    """Concentration rho_mu(v) = max_x P(X(v) = x); rho_1 is the mu=1 case."""
    return walk_distribution(v, law, p, mode, dense_threshold).rho()


def neighborhood(w, law: StepLaw, p: PrimeModulus | int,
                 dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> np.ndarray:
    """N(w): residues reached at least half as often as 0, ascending.

    When P(X = 0) = 0 (possible only for mu = 1) the literal definition
    admits every residue, and that is what is returned.
    """
    return walk_distribution(w, law, p, "exact", dense_threshold).neighborhood()


# ---------------------------------------------------------------------------
# Inverse witness machinery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LOWitness:
    """A small index set T whose restriction's neighborhood covers almost
    all coordinates of v; D is the budget both |T| and the exceptional
    count must respect."""

    indices: tuple[int, ...]          # T, ascending
    w: tuple[int, ...]                # v restricted to T
    neighborhood: tuple[int, ...]     # N(w), ascending residues
    exceptional: tuple[int, ...]      # i with v_i not in N(w), ascending
    budget: float                     # D
    rho: Fraction                     # rho_mu(v)
    log_base: float


def _budget_d(mu: Fraction, rho: Fraction, log_base: float) -> float:
    """D = (2/mu) * log(1/rho), log taken in log_base."""
    log_inv_rho = math.log(rho.denominator) - math.log(rho.numerator)
    return (2.0 / float(mu)) * (log_inv_rho / math.log(log_base))


def _witness_ok(v_res: np.ndarray, t_idx: tuple[int, ...], law: StepLaw, p: int,
                d_budget: float, rho: Fraction, log_base: float,
                dense_threshold: int) -> LOWitness | None:
    if len(t_idx) > d_budget:
        return None
    w = v_res[list(t_idx)]
    nb = walk_distribution(w, law, p, "exact", dense_threshold).neighborhood()
    if Fraction(len(nb), 1) * rho > 256:
        return None
    in_nb = np.isin(v_res, nb)
    exceptional = tuple(int(i) for i in np.nonzero(~in_nb)[0])
    if len(exceptional) > d_budget:
        return None
    return LOWitness(
        indices=tuple(int(i) for i in t_idx),
        w=tuple(int(x) for x in w),
        neighborhood=tuple(int(x) for x in nb),
        exceptional=exceptional,
        budget=d_budget,
        rho=rho,
        log_base=float(log_base),
    )


def find_lo_witness(v, law: StepLaw, p: PrimeModulus | int, budget: int = 20000,
                    log_base: float = math.e,
                    exhaustive_d_cap: int = 20, exhaustive_t_cap: int = 6,
                    dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> LOWitness | None:
    """Search for an inverse witness: T with |T| <= D such that at most D
    coordinates of v fall outside N(v_T), and |N(v_T)| <= 256/rho_mu(v).

    Strategy: greedy growth of T by coverage (ties to the lowest index),
    then exhaustive subset search when the dimension is small. Returns
    None only when both strategies complete without success — on inputs
    satisfying the hypotheses that is a reportable finding, since the
    theorem guarantees existence. Raises BudgetExhausted when the budget
    (counted in neighborhood evaluations) runs out first.
    """
    pi = int(p)
    if not is_prime(pi) or pi % 2 == 0:
        raise ValueError(f"p must be an odd prime, got {pi}")
    if law.mu > Fraction(1, 4):
        raise ValueError(f"the inverse theorem requires mu <= 1/4, got {law.mu}")
    v_res = _residues(v, pi)
    d = len(v_res)
    supp = int(np.count_nonzero(v_res))
    rho = walk_distribution(v_res, law, pi, "exact", dense_threshold).rho()
    d_budget = _budget_d(law.mu, rho, log_base)
    if supp < d_budget:
        raise LOPreconditionError(
            f"support {supp} below D = {d_budget:.3f} (hypothesis |v| >= D)")
    if rho * pi < 2:
        raise LOPreconditionError(
            f"rho = {rho} below 2/p (hypothesis rho_mu(v) >= 2/p)")

    evals = budget

    def attempt(t_idx: tuple[int, ...]) -> LOWitness | None:
        nonlocal evals
        if evals <= 0:
            raise BudgetExhausted(f"witness search budget {budget} exhausted")
        evals -= 1
        return _witness_ok(v_res, t_idx, law, pi, d_budget, rho, log_base,
                           dense_threshold)

    # greedy: grow T by best single-coordinate coverage gain
    t_list: list[int] = []
    wit = attempt(())
    if wit is not None:
        return wit
    while len(t_list) + 1 <= d_budget:
        best_j = -1
        best_cov = -1
        for j in range(d):
            if j in t_list:
                continue
            if evals <= 0:
                raise BudgetExhausted(f"witness search budget {budget} exhausted")
            evals -= 1
            trial = sorted(t_list + [j])
            nb = walk_distribution(v_res[trial], law, pi, "exact",
                                   dense_threshold).neighborhood()
            rest = np.delete(np.arange(d), trial)
            cov = int(np.isin(v_res[rest], nb).sum())
            if cov > best_cov:
                best_cov, best_j = cov, j
        if best_j < 0:
            break
        t_list.append(best_j)
        wit = attempt(tuple(sorted(t_list)))
        if wit is not None:
            return wit

    # exhaustive fallback on small dimensions
    if d <= exhaustive_d_cap:
        max_size = min(int(d_budget), exhaustive_t_cap, d)
        for size in range(max_size + 1):
            for comb in itertools.combinations(range(d), size):
                wit = attempt(comb)
                if wit is not None:
                    return wit
    return None


def verify_witness(v, law: StepLaw, p: PrimeModulus | int, wit: LOWitness,
                   dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> bool:
    """Recompute everything the witness claims and check every bound.

    Checks: w = v_T, N recomputed from scratch matches, the exceptional
    set is exactly {i : v_i not in N}, |T| <= D and |exceptional| <= D for
    D recomputed from rho_mu(v) under the witness's log base, and the
    size bound |N| <= 256 / rho_mu(v).
    """
    pi = int(p)
    v_res = _residues(v, pi)
    d = len(v_res)
    if any(not (0 <= i < d) for i in wit.indices):
        return False
    if tuple(int(x) for x in v_res[list(wit.indices)]) != wit.w:
        return False
    rho = walk_distribution(v_res, law, pi, "exact", dense_threshold).rho()
    if rho != wit.rho:
        return False
    d_budget = _budget_d(law.mu, rho, wit.log_base)
    if len(wit.indices) > d_budget:
        return False
    nb = walk_distribution(np.array(wit.w, dtype=np.int64), law, pi, "exact",
                           dense_threshold).neighborhood()
    if tuple(int(x) for x in nb) != wit.neighborhood:
        return False
    in_nb = np.isin(v_res, nb)
    exceptional = tuple(int(i) for i in np.nonzero(~in_nb)[0])
    if exceptional != wit.exceptional:
        return False
    if len(exceptional) > d_budget:
        return False
    if Fraction(len(nb), 1) * rho > 256:
        return False
    return True


# ---------------------------------------------------------------------------
# Fourier-side comparison lemma, checked on instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourierLemmaResult:
    nu: Fraction | None       # largest passing grid point, or None
    ratio: Fraction           # rho_mu / rho_nu at nu (or the best seen)
    checked: tuple[Fraction, ...]


DEFAULT_NU_GRID = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))


def check_fourier_lemma(v, c, mu_law: StepLaw, p: PrimeModulus | int,
                        nu_grid=None, K: int = 8,
                        dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> FourierLemmaResult:
    """Find the largest grid nu with rho_mu(v) <= c * rho_nu(v).

    Preconditions (the lemma's regime, constants fixed): rho_mu(v) >= 2d/p
    and |v| >= K. A grid with no passing point returns nu=None together
    with the best ratio seen — a reportable finding, not an error.
    """
    pi = int(p)
    c = Fraction(c)
    if not (0 < c <= 1):
        raise ValueError(f"c must lie in (0, 1], got {c}")
    grid = tuple(sorted((Fraction(x) for x in (nu_grid or DEFAULT_NU_GRID)), reverse=True))
    v_res = _residues(v, pi)
    d = len(v_res)
    supp = int(np.count_nonzero(v_res))
    if supp < K:
        raise LOPreconditionError(f"support {supp} below K = {K}")
    rho_m = walk_distribution(v_res, mu_law, pi, "exact", dense_threshold).rho()
    if rho_m * pi < 2 * d:
        raise LOPreconditionError(
            f"rho_mu = {rho_m} below 2d/p = {Fraction(2 * d, pi)}")
    best: Fraction | None = None
    for nu in grid:
        rho_n = walk_distribution(v_res, StepLaw(nu), pi, "exact", dense_threshold).rho()
        ratio = rho_m / rho_n
        if best is None or ratio < best:
            best = ratio
        if rho_m <= c * rho_n:
            return FourierLemmaResult(nu=nu, ratio=ratio, checked=grid)
    return FourierLemmaResult(nu=None, ratio=best, checked=grid)


# ---------------------------------------------------------------------------
# Collision estimator for rho at scales where exact convolution is out
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RhoEstimate:
    lower: float        # Wilson-lower bound on q = sum_x P(x)^2 (and q <= rho)
    upper: float        # sqrt of the Wilson-upper bound on q (and rho <= sqrt q)
    modal_freq: float   # empirical modal frequency, a secondary lower estimate
    q_hat: float
    collisions: int
    trials: int


def _sample_walks(v_res: np.ndarray, law: StepLaw, p: int, trials: int,
                  key: int) -> np.ndarray:
    """trials walk endpoints, exact dyadic step probabilities."""
    d = len(v_res)
    if d == 0:
        return np.zeros(trials, dtype=np.int64)
    thr1 = law.mu.numerator << (63 - law.k)   # P(+1) cutoff over 2^64
    thr2 = 2 * thr1                           # P(-1) cutoff; 2^64 iff mu = 1
    out = np.empty(trials, dtype=np.int64)
    chunk = max(1, (1 << 22) // d)
    pos = 0
    while pos < trials:
        m = min(chunk, trials - pos)
        ctr = (np.arange(pos, pos + m, dtype=np.uint64)[:, None] * np.uint64(d)
               + np.arange(d, dtype=np.uint64)[None, :])
        words = hash_counters(key, ctr)
        eps = np.zeros((m, d), dtype=np.int64)
        plus = words < np.uint64(thr1)
        eps[plus] = 1
        if thr2 >= 1 << 64:
            eps[~plus] = -1
        else:
            eps[~plus & (words < np.uint64(thr2))] = -1
        out[pos : pos + m] = (eps @ v_res) % p
        pos += m
    return out


def collision_estimate_rho(v, law: StepLaw, p: PrimeModulus | int, trials: int,
                           seed: int, z: float = Z_99) -> RhoEstimate:
    """Monte Carlo bracket for rho via the collision probability.

    With q = sum_x P(x)^2 one has q <= rho <= sqrt(q), so a Wilson
    interval [q_lo, q_hi] for q yields [q_lo, sqrt(q_hi)] for rho.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials")
    pi = int(p)
    v_res = _residues(v, pi)
    if len(v_res) and float(len(v_res)) * pi >= 2.0 ** 62:
        raise ValueError("d * p too large for the vectorized sampler")
    xs = _sample_walks(v_res, law, pi, trials, derive_key(seed, 0xA7, 1))
    ys = _sample_walks(v_res, law, pi, trials, derive_key(seed, 0xA7, 2))
    collisions = int((xs == ys).sum())
    q_lo, q_hi = wilson_interval(collisions, trials, z)
    _, counts = np.unique(xs, return_counts=True)
    modal = float(counts.max()) / trials
    return RhoEstimate(
        lower=q_lo,
        upper=math.sqrt(q_hi),
        modal_freq=modal,
        q_hat=collisions / trials,
        collisions=collisions,
        trials=trials,
    )
