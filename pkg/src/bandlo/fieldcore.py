"""Prime selection and modular arithmetic primitives.

Everything here is exact integer arithmetic: primality is decided by a
deterministic Miller-Rabin witness set that is exact for all word-sized
inputs (and far beyond, up to 3.3e24), and modular inverses go through
Python's builtin exact pow. No floating-point reduction anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PrimeModulus",
    "is_prime",
    "next_prime",
    "prev_prime",
    "choose_prime",
    "mod_inv",
]

# Deterministic Miller-Rabin witnesses: exact for all n < 3,317,044,064,679,887,385,961,981
# (Sorenson & Webster), which covers every 64-bit input with a wide margin.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_EXACT_BOUND = 3_317_044_064_679_887_385_961_981

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)


@dataclass(frozen=True)
class PrimeModulus:
    """An odd prime p with certification metadata.

    ``verified`` is True when primality was decided by the deterministic
    test (always the case for word-sized p). ``clamped`` marks moduli that
    were capped by choose_prime instead of following the growth formula.
    """

    p: int
    verified: bool = True
    clamped: bool = False

    def __post_init__(self) -> None:
        if self.p < 3 or self.p % 2 == 0:
            raise ValueError(f"modulus must be an odd prime >= 3, got {self.p}")

    def __int__(self) -> int:
        return self.p

    def __index__(self) -> int:
        return self.p


def is_prime(m: int) -> bool:
    """Deterministic primality test, exact for all m < 3.3e24.

    Trial division by small primes, then Miller-Rabin with the fixed
    witness set. Inputs beyond the exactness bound are rejected rather
    than silently answered probabilistically.
    """
    if m < 2:
        raise ValueError(f"is_prime requires m >= 2, got {m}")
    if m >= _MR_EXACT_BOUND:
        raise OverflowError(f"deterministic primality bound exceeded: {m}")
    for q in _SMALL_PRIMES:
        if m == q:
            return True
        if m % q == 0:
            return False
    # m odd and > 61 here: write m-1 = 2^r * d
    d = m - 1
    r = (d & -d).bit_length() - 1
    d >>= r
    for a in _MR_WITNESSES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(r - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def next_prime(lo: int) -> PrimeModulus:
    """Smallest prime >= lo, as a PrimeModulus (so the minimum is 3)."""
    if lo < 2:
        raise ValueError(f"next_prime requires lo >= 2, got {lo}")
    m = max(lo, 3)
    if m % 2 == 0:
        m += 1
    while not is_prime(m):
        m += 2
    return PrimeModulus(m)


def prev_prime(hi: int) -> PrimeModulus:
    """Largest prime <= hi (with hi >= 3); even 'primes' are never returned."""
    if hi < 3:
        raise ValueError(f"prev_prime requires hi >= 3, got {hi}")
    m = hi if hi % 2 == 1 else hi - 1
    while m >= 3:
        if is_prime(m):
            return PrimeModulus(m)
        m -= 2
    raise ValueError("no odd prime below bound")  # unreachable for hi >= 3


def choose_prime(n: int, alpha: float, rho: float, cap: int) -> PrimeModulus:
    """Smallest prime >= exp(rho * n^(alpha/2)), clamped at cap.

    The growth target is evaluated in log space so astronomically large
    targets (any realistic n with the theoretical schedule) cleanly fall
    into the clamped branch: the result is then the largest prime <= cap,
    with the ``clamped`` flag set. The result is never below 3.
    """
    if n < 1:
        raise ValueError(f"choose_prime requires n >= 1, got {n}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    if cap < 3:
        raise ValueError(f"cap must be >= 3, got {cap}")
    log_target = rho * n ** (alpha / 2.0)
    if log_target > math.log(cap):
        clamped = prev_prime(cap)
        return PrimeModulus(clamped.p, verified=True, clamped=True)
    target = max(3, math.ceil(math.exp(log_target)))
    chosen = next_prime(target)
    if chosen.p > cap:
        clamped = prev_prime(cap)
        return PrimeModulus(clamped.p, verified=True, clamped=True)
    return chosen


def mod_inv(a: int, p: PrimeModulus | int) -> int:
    """Inverse of a modulo the prime p; a must be nonzero mod p."""
    q = int(p)
    a %= q
    if a == 0:
        raise ZeroDivisionError("mod_inv of 0")
    return pow(a, -1, q)
