"""Monte Carlo campaigns and exact enumerations for singularity decay and
kernel-vector structure.

Two experiment families:

* Singularity probability: sample matrices from a profile and test
  det = 0 either exactly over Z (CRT or, for n <= 5, batched exact
  Leibniz determinants) or over a chosen F_p; summarize with Wilson
  intervals, rule-of-three censoring, and a scaling fit of log(1/P)
  against n^(alpha/2).

* Kernel structure survey: zero one row, compute the exact kernel over
  F_p, and classify each partition block of each canonical kernel vector
  by the proof's trichotomy (small support / strong anticoncentration /
  dyadic bucket), recording the concentration of the distinguished block.

Every trial is a pure function of (config, n, trial index); records merge
deterministically regardless of execution order or thread count.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ensembles import (
    BandProfile,
    IntegerMatrix,
    IntervalPartition,
    OffbandLaw,
    partition_intervals,
    row_context,
    sample_matrix,
    zero_row,
)
from .fieldcore import PrimeModulus, choose_prime, is_prime
from .lotools import StepLaw, walk_distribution
from .rankengine import FpMatrix, is_singular_Z, kernel_fp, reduce_mod
from .rng import derive_key, mix64, uniform_below
from .statutil import Z_99, rule_of_three, wilson_interval

__all__ = [
    "ExperimentConfig",
    "CaseLabel",
    "BlockStat",
    "VectorSurvey",
    "TrialRecord",
    "SingularitySummary",
    "ScalingFit",
    "estimate_singularity_probability",
    "singularity_trial",
    "enumerate_singularity_probability",
    "kernel_structure_survey",
    "survey_trial",
    "classify_blocks",
    "fit_scaling",
    "fit_tail_decay",
    "singular_row_span_check",
]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved campaign configuration.

    d_list, when given, must parallel n_list; otherwise d_n = ceil(n^alpha).
    prime_policy is one of "fixed", "choose", "integer".
    I_policy is one of "center", "uniform", "fixed".
    """

    kind: str = "general"
    offband: OffbandLaw = field(default_factory=OffbandLaw.zero)
    alpha: float = 0.75
    n_list: tuple[int, ...] = (16,)
    d_list: tuple[int, ...] | None = None
    rho: float = 0.5
    tau: float = 0.25
    mu: Fraction = Fraction(1, 4)
    k_support: int = 8
    prime_policy: str = "choose"
    prime_fixed: int | None = None
    prime_cap: int = 1 << 20
    trials: int = 100
    master_seed: int = 0
    i_policy: str = "center"
    i_fixed: int | None = None
    dense_threshold: int = 1 << 22

    def validate(self) -> list[str]:
        """Return the full list of problems (empty when valid)."""
        errs = []
        if self.kind not in ("general", "block", "periodic", "modified"):
            errs.append(f"unknown kind {self.kind!r}")
        if not (0.0 < self.alpha < 1.0):
            errs.append(f"alpha must lie in (0,1), got {self.alpha}")
        if self.trials < 1:
            errs.append(f"trials must be >= 1, got {self.trials}")
        if self.rho <= 0:
            errs.append(f"rho must be positive, got {self.rho}")
        if self.tau <= 0:
            errs.append(f"tau must be positive, got {self.tau}")
        if not (0 < self.mu <= 1):
            errs.append(f"mu must lie in (0,1], got {self.mu}")
        if Fraction(self.mu).denominator & (Fraction(self.mu).denominator - 1):
            errs.append(f"mu must be dyadic, got {self.mu}")
        if self.k_support < 1:
            errs.append(f"K must be >= 1, got {self.k_support}")
        if not self.n_list:
            errs.append("n_list is empty")
        if self.d_list is not None and len(self.d_list) != len(self.n_list):
            errs.append("d_list must parallel n_list")
        if self.prime_policy not in ("fixed", "choose", "integer"):
            errs.append(f"unknown prime_policy {self.prime_policy!r}")
        if self.prime_policy == "fixed":
            if self.prime_fixed is None:
                errs.append("prime_policy=fixed requires a prime")
            elif self.prime_fixed < 3 or not is_prime(self.prime_fixed):
                errs.append(f"fixed prime {self.prime_fixed} is not an odd prime")
        if self.i_policy not in ("center", "uniform", "fixed"):
            errs.append(f"unknown I_policy {self.i_policy!r}")
        if self.i_policy == "fixed" and self.i_fixed is None:
            errs.append("I_policy=fixed requires an index")
        return errs

    def warnings(self) -> list[str]:
        out = []
        if self.tau >= self.rho / 2:
            out.append(
                f"tau = {self.tau} >= rho/2 = {self.rho / 2}: the structure "
                "theorem's proof needs tau < rho/2; proceeding anyway")
        return out

    def d_for(self, n: int) -> int:
        if self.d_list is not None:
            return self.d_list[self.n_list.index(n)]
        return min(n, max(1, math.ceil(n ** self.alpha)))

    def profile_for(self, n: int) -> BandProfile:
        return BandProfile(n=n, d=self.d_for(n), kind=self.kind,
                           offband=self.offband, alpha=self.alpha)

    def modulus_for(self, n: int) -> PrimeModulus | None:
        """None means exact integer arithmetic (CRT)."""
        if self.prime_policy == "integer":
            return None
        if self.prime_policy == "fixed":
            return PrimeModulus(self.prime_fixed)
        return choose_prime(n, self.alpha, self.rho, self.prime_cap)


def _trial_seed(master_seed: int, n: int, trial: int) -> int:
    return derive_key(master_seed, 0xA11, n, trial)


def _row_index(cfg: ExperimentConfig, n: int, trial: int) -> int:
    if cfg.i_policy == "center":
        return n // 2
    if cfg.i_policy == "fixed":
        if not (0 <= cfg.i_fixed < n):
            raise ValueError(f"fixed row {cfg.i_fixed} outside range({n})")
        return cfg.i_fixed
    key = derive_key(cfg.master_seed, 0x1D, n, trial)
    return int(uniform_below(key, np.zeros(1, dtype=np.uint64), n)[0])


# ---------------------------------------------------------------------------
# Exact batched determinants over Z (Leibniz expansion, n <= 5)
# ---------------------------------------------------------------------------

def _perm_terms(n: int):
    perms = []
    for sigma in itertools.permutations(range(n)):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if sigma[a] > sigma[b])
        perms.append((sigma, -1 if inv & 1 else 1))
    return perms


def _batch_det_exact(mats: np.ndarray) -> np.ndarray:
    """Exact determinants of a (batch, n, n) int64 stack, n <= 5.

    The Leibniz sum stays well inside int64 for entries bounded by B with
    n! * B^n < 2^62 (checked by the caller).
    """
    n = mats.shape[1]
    det = np.zeros(mats.shape[0], dtype=np.int64)
    for sigma, sign in _perm_terms(n):
        term = mats[:, 0, sigma[0]].copy()
        for i in range(1, n):
            term *= mats[:, i, sigma[i]]
        det += sign * term
    return det


def _leibniz_bound_ok(n: int, max_abs: int) -> bool:
    return math.factorial(n) * max_abs ** n < 2 ** 62


# ---------------------------------------------------------------------------
# Matrix batch sampling that reproduces sample_matrix trial-for-trial
# ---------------------------------------------------------------------------

def _vec_mix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x ^= x >> np.uint64(30)
        x *= np.uint64(0xBF58476D1CE4E5B9)
        x ^= x >> np.uint64(27)
        x *= np.uint64(0x94D049BB133111EB)
        x ^= x >> np.uint64(31)
    return x


def _vec_derive(keys: np.ndarray, tag: int) -> np.ndarray:
    return _vec_mix64(keys ^ np.uint64(mix64(tag)))


def _trial_keys(master_seed: int, n: int, trials: np.ndarray) -> np.ndarray:
    """Vectorized derive_key(master_seed, 0xA11, n, t) for a trial array."""
    k = derive_key(master_seed, 0xA11, n)
    return _vec_mix64(np.uint64(k) ^ _vec_mix64(trials.astype(np.uint64)))


def _batch_sign_matrices(profile: BandProfile, master_seed: int,
                         trials: np.ndarray) -> np.ndarray:
    """(len(trials), n, n) stack equal to per-trial sample_matrix output.

    Only valid for profiles whose off-band law is zero/constant/rademacher
    (the sign-enumerable laws); the caller checks.
    """
    from .ensembles import _support_mask  # module-internal reuse

    n = profile.n
    mask = _support_mask(profile)
    ii, jj = np.nonzero(mask)
    counters = ii.astype(np.uint64) * np.uint64(n) + jj.astype(np.uint64)
    keys = _vec_derive(_trial_keys(master_seed, n, trials), 0x51)
    # hash (key_t, counter_e) for every trial/entry pair
    with np.errstate(over="ignore"):
        x = counters[None, :] * np.uint64(0x9E3779B97F4A7C15) + _vec_mix64(keys)[:, None]
        x ^= x >> np.uint64(30)
        x *= np.uint64(0xBF58476D1CE4E5B9)
        x ^= x >> np.uint64(27)
        x *= np.uint64(0x94D049BB133111EB)
        x ^= x >> np.uint64(31)
    signs = 1 - 2 * (x >> np.uint64(63)).astype(np.int64)
    out = np.zeros((len(trials), n, n), dtype=np.int64)
    out[:, ii, jj] = signs
    law = profile.offband
    if profile.kind == "general" and law.kind != "zero":
        oi, oj = np.nonzero(~mask)
        octr = oi.astype(np.uint64) * np.uint64(n) + oj.astype(np.uint64)
        if law.kind == "constant":
            out[:, oi, oj] = law.c
        elif law.kind == "rademacher":
            okeys = _vec_derive(_trial_keys(master_seed, n, trials), 0x0F)
            with np.errstate(over="ignore"):
                y = octr[None, :] * np.uint64(0x9E3779B97F4A7C15) + _vec_mix64(okeys)[:, None]
                y ^= y >> np.uint64(30)
                y *= np.uint64(0xBF58476D1CE4E5B9)
                y ^= y >> np.uint64(27)
                y *= np.uint64(0x94D049BB133111EB)
                y ^= y >> np.uint64(31)
            out[:, oi, oj] = 1 - 2 * (y >> np.uint64(63)).astype(np.int64)
        else:
            raise ValueError("batch path does not cover uniform_range")
    return out


# ---------------------------------------------------------------------------
# Singularity estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularitySummary:
    n: int
    modulus: str            # "Z" or the prime as a string
    trials: int
    singular_count: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    censored: bool
    censored_bound: float | None


def singularity_trial(cfg: ExperimentConfig, n: int, trial: int) -> bool:
    """Singularity flag of one trial; the scalar reference path."""
    profile = cfg.profile_for(n)
    a = sample_matrix(profile, _trial_seed(cfg.master_seed, n, trial))
    pm = cfg.modulus_for(n)
    if pm is None:
        return is_singular_Z(a)
    from .rankengine import is_singular_fp

    return is_singular_fp(reduce_mod(a, pm))


def _singular_flags(cfg: ExperimentConfig, n: int) -> np.ndarray:
    """Per-trial singularity flags, batched when cheaply possible."""
    profile = cfg.profile_for(n)
    pm = cfg.modulus_for(n)
    trials = np.arange(cfg.trials, dtype=np.uint64)
    batchable = (
        pm is None
        and n <= 5
        and profile.offband.kind != "uniform_range"
        and _leibniz_bound_ok(n, max(1, abs(profile.offband.c)))
    )
    if batchable:
        flags = np.empty(cfg.trials, dtype=bool)
        step = max(1, (1 << 22) // (n * n))
        for lo in range(0, cfg.trials, step):
            part = trials[lo : lo + step]
            mats = _batch_sign_matrices(profile, cfg.master_seed, part)
            flags[lo : lo + step] = _batch_det_exact(mats) == 0
        return flags
    return np.array(
        [singularity_trial(cfg, n, t) for t in range(cfg.trials)], dtype=bool
    )


def estimate_singularity_probability(cfg: ExperimentConfig) -> list[SingularitySummary]:
    """Empirical singularity frequency per n with Wilson 99% intervals.

    Zero-singular cells are reported as censored with the rule-of-three
    bound 3/trials.
    """
    out = []
    for n in cfg.n_list:
        flags = _singular_flags(cfg, n)
        count = int(flags.sum())
        pm = cfg.modulus_for(n)
        ci_lo, ci_hi = wilson_interval(count, cfg.trials, Z_99)
        censored = count == 0
        out.append(SingularitySummary(
            n=n,
            modulus="Z" if pm is None else str(pm.p),
            trials=cfg.trials,
            singular_count=count,
            p_hat=count / cfg.trials,
            ci_lo=ci_lo,
            ci_hi=ci_hi,
            censored=censored,
            censored_bound=rule_of_three(cfg.trials) if censored else None,
        ))
    return out


def enumerate_singularity_probability(n: int, profile: BandProfile) -> Fraction:
    """Exact singularity probability by exhausting every sign assignment.

    Only sign-valued randomness is enumerable (uniform_range off-band laws
    are rejected); at most 25 random entries.
    """
    if n > 5 or profile.n != n:
        raise ValueError("exact enumeration is limited to n <= 5")
    if profile.offband.kind == "uniform_range":
        raise ValueError("uniform_range off-band entries are not sign-enumerable")
    from .ensembles import _support_mask

    mask = _support_mask(profile)
    positions = list(zip(*np.nonzero(mask)))
    if profile.kind == "general" and profile.offband.kind == "rademacher":
        positions += list(zip(*np.nonzero(~mask)))
    k = len(positions)
    if k > 25:
        raise ValueError(f"{k} random entries exceed the enumeration cap of 25")
    base = np.zeros((n, n), dtype=np.int64)
    if profile.kind == "general" and profile.offband.kind == "constant":
        base[~mask] = profile.offband.c
    if not _leibniz_bound_ok(n, max(1, int(np.abs(base).max(initial=1)))):
        raise ValueError("entry bound too large for exact int64 determinants")
    rows = np.array([i for i, _ in positions], dtype=np.int64)
    cols = np.array([j for _, j in positions], dtype=np.int64)
    singular = 0
    step = max(1, (1 << 21) // (n * n))
    for lo in range(0, 1 << k, step):
        chunk = np.arange(lo, min(lo + step, 1 << k), dtype=np.int64)
        mats = np.broadcast_to(base, (len(chunk), n, n)).copy()
        bits = (chunk[:, None] >> np.arange(k)[None, :]) & 1
        mats[:, rows, cols] = 1 - 2 * bits
        singular += int((_batch_det_exact(mats) == 0).sum())
    return Fraction(singular, 1 << k)


# ---------------------------------------------------------------------------
# Block classification (the proof's trichotomy)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CaseLabel:
    """small_support (case 1) / strong_anticonc (case 2) / dyadic(t) (case 3).

    Zero blocks are the degenerate sub-case of small_support (rho = 1).
    """

    kind: str
    t: int | None = None
    degenerate: bool = False


def _rho_pair(rho: Fraction) -> tuple[int, int]:
    """(numerator, exponent) with rho = num / 2**exp, num odd."""
    return rho.numerator, rho.denominator.bit_length() - 1


def classify_blocks(v, part: IntervalPartition, mu: Fraction | StepLaw, k_support: int,
                    p: PrimeModulus | int,
                    dense_threshold: int = 1 << 22) -> list[CaseLabel]:
    """Label every partition block of v, in this priority order:
    support <= K, then rho_mu <= 2/p, then the dyadic bucket of rho_mu."""
    law = mu if isinstance(mu, StepLaw) else StepLaw(Fraction(mu))
    pi = int(p)
    arr = np.mod(np.asarray(v, dtype=np.int64).reshape(-1), pi)
    if len(arr) != part.n:
        raise ValueError(f"vector length {len(arr)} does not match partition {part.n}")
    labels = []
    two_over_p = Fraction(2, pi)
    for k in range(part.m):
        block = part.restrict(arr, k)
        supp = int(np.count_nonzero(block))
        if supp <= k_support:
            labels.append(CaseLabel("small_support", degenerate=(supp == 0)))
            continue
        mf = walk_distribution(block, law, pi, "exact", dense_threshold)
        rho = mf.rho()
        if rho <= two_over_p:
            labels.append(CaseLabel("strong_anticonc"))
        else:
            labels.append(CaseLabel("dyadic", t=mf.dyadic_bucket()))
    return labels


# ---------------------------------------------------------------------------
# Kernel structure survey
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockStat:
    k: int
    size: int
    support: int
    rho1_num: int
    rho1_exp: int
    rho_mu_num: int
    rho_mu_exp: int
    case: str
    t: int | None
    degenerate: bool


@dataclass(frozen=True)
class VectorSurvey:
    index: int
    blocks: tuple[BlockStat, ...]
    tail_rho_num: int       # rho_1 on the distinguished block, numerator
    tail_rho_exp: int
    tail_ok: bool           # rho_1(v_I_{nI}) <= exp(-tau * n^(alpha/2))


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    n: int
    p: int
    row: int
    row_block: int
    kernel_dim: int
    partition_fallback: bool
    vectors: tuple[VectorSurvey, ...]
    wall_time_s: float = 0.0  # not serialized: reruns must be byte-identical

    def tail_ok(self) -> bool:
        return self.vectors[0].tail_ok if self.vectors else False


def _log2_fraction(num: int, exp: int) -> float:
    """log2(num / 2**exp) for possibly huge numerators."""
    return (math.log2(num) if num.bit_length() < 900 else
            (num.bit_length() - 1) + math.log2(num >> (num.bit_length() - 54)) - 53) - exp


def _survey_vector(vec: np.ndarray, part: IntervalPartition, ctx_block: int,
                   cfg: ExperimentConfig, p: int, index: int) -> VectorSurvey:
    law_mu = StepLaw(cfg.mu)
    law_one = StepLaw(Fraction(1))
    two_over_p = Fraction(2, p)
    stats = []
    for k in range(part.m):
        block = part.restrict(vec, k)
        supp = int(np.count_nonzero(block))
        mf1 = walk_distribution(block, law_one, p, "exact", cfg.dense_threshold)
        mfm = walk_distribution(block, law_mu, p, "exact", cfg.dense_threshold)
        rho_m = mfm.rho()
        # same trichotomy as classify_blocks, sharing the pmfs already built
        if supp <= cfg.k_support:
            lab = CaseLabel("small_support", degenerate=(supp == 0))
        elif rho_m <= two_over_p:
            lab = CaseLabel("strong_anticonc")
        else:
            lab = CaseLabel("dyadic", t=mfm.dyadic_bucket())
        n1, e1 = _rho_pair(mf1.rho())
        nm, em = _rho_pair(rho_m)
        stats.append(BlockStat(
            k=k, size=len(block), support=supp,
            rho1_num=n1, rho1_exp=e1, rho_mu_num=nm, rho_mu_exp=em,
            case=lab.kind, t=lab.t, degenerate=lab.degenerate,
        ))
    tail = stats[ctx_block]
    n = part.n
    threshold_log2 = -cfg.tau * n ** (cfg.alpha / 2.0) / math.log(2.0)
    tail_ok = _log2_fraction(tail.rho1_num, tail.rho1_exp) <= threshold_log2
    return VectorSurvey(index=index, blocks=tuple(stats),
                        tail_rho_num=tail.rho1_num, tail_rho_exp=tail.rho1_exp,
                        tail_ok=tail_ok)


def survey_trial(cfg: ExperimentConfig, n: int, trial: int) -> TrialRecord:
    """One kernel-structure trial (pure function of its arguments)."""
    pm = cfg.modulus_for(n)
    if pm is None:
        raise ValueError("the kernel survey needs a prime modulus policy")
    if pm.p > cfg.dense_threshold:
        raise ValueError(
            f"p = {pm.p} exceeds the exact-pmf dense threshold "
            f"{cfg.dense_threshold}; lower the prime cap")
    profile = cfg.profile_for(n)
    part = partition_intervals(n, profile.d)
    row = _row_index(cfg, n, trial)
    ctx = row_context(part, row)
    a = sample_matrix(profile, _trial_seed(cfg.master_seed, n, trial))
    az = zero_row(a, row)
    kb = kernel_fp(reduce_mod(az, pm))
    if kb.dim < 1:
        raise AssertionError("a zero row forces kernel dimension >= 1")
    vectors = tuple(
        _survey_vector(kb.vectors[i], part, ctx.block, cfg, pm.p, i)
        for i in range(kb.dim)
    )
    return TrialRecord(
        trial=trial, n=n, p=pm.p, row=row, row_block=ctx.block,
        kernel_dim=kb.dim, partition_fallback=part.fallback, vectors=vectors,
    )


def kernel_structure_survey(cfg: ExperimentConfig) -> list[TrialRecord]:
    records = []
    for n in cfg.n_list:
        for t in range(cfg.trials):
            records.append(survey_trial(cfg, n, t))
    return records


# ---------------------------------------------------------------------------
# Scaling fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    c_hat: float
    alpha: float
    pairs: tuple[tuple[float, float], ...]   # (n^(alpha/2), log(1/P)) used
    residuals: tuple[float, ...]
    r_squared: float
    censored_n: tuple[int, ...]
    censor_violations: tuple[int, ...]       # censored n whose bound undercuts the fit


def fit_scaling(points, alpha: float) -> ScalingFit:
    """Least squares of log(1/P) on n^(alpha/2) through the origin.

    ``points`` holds (n, p_hat, censored) triples or SingularitySummary
    objects. Censored cells contribute no fit; their rule-of-three bound
    is checked against the fitted prediction and flagged when it falls
    below (a bound tighter than the fit contradicts it).
    """
    triples = []
    for pt in points:
        if isinstance(pt, SingularitySummary):
            value = pt.censored_bound if pt.censored else pt.p_hat
            triples.append((pt.n, value, pt.censored))
        else:
            triples.append(pt)
    used = [(n, v) for n, v, c in triples if not c]
    if len(used) < 2:
        raise ValueError("need at least 2 uncensored points to fit")
    if any(v <= 0 or v > 1 for _, v in used):
        raise ValueError("uncensored probabilities must lie in (0, 1]")
    xs = np.array([n ** (alpha / 2.0) for n, _ in used])
    ys = np.array([math.log(1.0 / v) for _, v in used])
    c_hat = float(xs @ ys / (xs @ xs))
    resid = ys - c_hat * xs
    total = float(ys @ ys)
    r2 = 1.0 - float(resid @ resid) / total if total > 0 else 1.0
    violations = []
    for n, bound, censored in triples:
        if censored and bound is not None:
            if bound < math.exp(-c_hat * n ** (alpha / 2.0)):
                violations.append(n)
    return ScalingFit(
        c_hat=c_hat,
        alpha=alpha,
        pairs=tuple((float(x), float(y)) for x, y in zip(xs, ys)),
        residuals=tuple(float(r) for r in resid),
        r_squared=r2,
        censored_n=tuple(n for n, _, c in triples if c),
        censor_violations=tuple(violations),
    )


def fit_tail_decay(records: list[TrialRecord], alpha: float) -> tuple[float, float, dict[int, float]]:
    """Affine fit of median log(1/rho_tail) against n^(alpha/2).

    Returns (tau_hat, r_squared, medians) with medians keyed by n; this is
    the empirical counterpart of the structure theorem's exp(-tau n^(alpha/2)).
    """
    by_n: dict[int, list[float]] = {}
    for rec in records:
        v = rec.vectors[0]
        by_n.setdefault(rec.n, []).append(_log2_fraction(v.tail_rho_num, v.tail_rho_exp))
    if len(by_n) < 2:
        raise ValueError("need at least two dimensions for the decay fit")
    ns = sorted(by_n)
    medians = {n: float(np.median(by_n[n])) for n in ns}
    xs = np.array([n ** (alpha / 2.0) for n in ns])
    ys = np.array([-medians[n] * math.log(2.0) for n in ns])  # ln(1/rho_median)
    a = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(a, ys, rcond=None)
    pred = a @ coef
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    median_rho = {n: 2.0 ** medians[n] for n in ns}
    return float(coef[0]), r2, median_rho


# ---------------------------------------------------------------------------
# Row-span certificate for singular matrices
# ---------------------------------------------------------------------------

def singular_row_span_check(a: IntegerMatrix, p: PrimeModulus | int):
    """For singular A over F_p: an index I whose row lies in the span of the
    others, plus a kernel vector v of A^I orthogonal to that row.

    Returns (I, v). Verifiable by recomputation: A^I v = 0 and <A[I], v> = 0.
    """
    pm = p if isinstance(p, PrimeModulus) else PrimeModulus(int(p))
    f = reduce_mod(a, pm)
    if f.n_rows != f.n_cols:
        raise ValueError("span check needs a square matrix")
    left = kernel_fp(FpMatrix(f.entries.T.copy(), pm, band_meta=f.band_meta))
    if left.dim == 0:
        raise ValueError("matrix is nonsingular over F_p")
    u = left.vectors[0]
    row = int(np.nonzero(u)[0][0])
    kb = kernel_fp(reduce_mod(zero_row(a, row), pm))
    v = kb.vectors[0]
    inner = int((a.entries[row].astype(object) @ v.astype(object)) % pm.p)
    if inner != 0:
        raise AssertionError("certificate failed: row not orthogonal to kernel vector")
    return row, v
