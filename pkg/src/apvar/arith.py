"""Elementary arithmetic: sieves, von Mangoldt functions, singular series.

Everything here is deterministic and cached where it is expensive; the
heavier consumers (character groups, psi tables) sit in their own modules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

EULER_GAMMA = 0.57721566490153286061
LOG_2PI = math.log(2.0 * math.pi)

SEGMENT_LENGTH = 1 << 22


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit, as an int64 array (simple Eratosthenes)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def iter_prime_segments(limit: int, segment_length: int = SEGMENT_LENGTH):
    """Yield int64 arrays of primes covering [2, limit] in ascending segments."""
    base = sieve_primes(math.isqrt(limit))
    low = 2
    while low <= limit:
        high = min(low + segment_length, limit + 1)  # exclusive
        mask = np.ones(high - low, dtype=bool)
        for p in base:
            if p * p >= high:
                break
            start = max(p * p, ((low + p - 1) // p) * p)
            mask[start - low :: p] = False
        if low <= 1:
            mask[: 2 - low] = False
        for p in base:
            if low <= p < high:
                mask[p - low] = True
            if p >= high:
                break
        yield np.flatnonzero(mask).astype(np.int64) + low
        low = high


@lru_cache(maxsize=4)
def prime_powers(limit: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted prime powers n <= limit with their von Mangoldt values log p.

    Returns (n, lam) with n int64 ascending and lam float64. This is the
    support of the Chebyshev psi accumulation used throughout.
    """
    chunks = []
    for seg in iter_prime_segments(limit):
        chunks.append(seg)
    primes = np.concatenate(chunks) if chunks else np.array([], dtype=np.int64)
    ns = [primes]
    lams = [np.log(primes.astype(np.float64))]
    for p in primes[primes <= math.isqrt(limit)]:
        pe = int(p) * int(p)
        lp = math.log(p)
        while pe <= limit:
            ns.append(np.array([pe], dtype=np.int64))
            lams.append(np.array([lp]))
            pe *= int(p)
    n = np.concatenate(ns)
    lam = np.concatenate(lams)
    order = np.argsort(n, kind="stable")
    return n[order], lam[order]


@lru_cache(maxsize=8)
def smallest_prime_factor(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 0 <= n <= limit (spf[0..1] = 0)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    if limit >= 2:
        spf[2::2] = 2
        for p in range(3, math.isqrt(limit) + 1, 2):
            if spf[p] == 0:
                sl = spf[p * p :: p]
                sl[sl == 0] = p
                spf[p * p :: p] = sl
        odd = np.arange(3, limit + 1, 2)
        untouched = odd[spf[odd] == 0]
        spf[untouched] = untouched
    return spf


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer with its prime factorization, primes ascending."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"bad factorization of {self.n}")
            last = p
            prod *= p**e
        if prod != self.n or self.n < 1:
            raise ValueError(f"factorization does not multiply to {self.n}")


def factorize(n: int, spf: np.ndarray | None = None) -> FactoredInteger:
    """Trial-division factorization, optionally accelerated by an spf table."""
    if n < 1:
        raise ValueError("n must be positive")
    m = n
    factors = []
    if spf is not None and n < len(spf):
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
    else:
        p = 2
        while p * p <= m:
            if m % p == 0:
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                factors.append((p, e))
            p += 1 if p == 2 else 2
        if m > 1:
            factors.append((m, 1))
    factors.sort()
    return FactoredInteger(n, tuple(factors))


def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorize(n).factors:
        phi *= (p - 1) * p ** (e - 1)
    return phi


def von_mangoldt(n: int) -> float:
    """log p if n is a prime power p^e (e >= 1), else 0."""
    if n < 1:
        raise ValueError("n must be positive")
    fact = factorize(n)
    if len(fact.factors) == 1:
        return math.log(fact.factors[0][0])
    return 0.0


def lambda2(n: int) -> float:
    """Second-order von Mangoldt function.

    (2e-1)(log p)^2 on p^e, 2 log p1 log p2 on p1^e1 p2^e2, zero otherwise;
    equals the divisor convolution sum_{d|n} (log d)^2 mu(n/d).
    """
    if n < 1:
        raise ValueError("n must be positive")
    fact = factorize(n)
    if len(fact.factors) == 1:
        p, e = fact.factors[0]
        return (2 * e - 1) * math.log(p) ** 2
    if len(fact.factors) == 2:
        (p1, _), (p2, _) = fact.factors
        return 2.0 * math.log(p1) * math.log(p2)
    return 0.0


@lru_cache(maxsize=1)
def twin_prime_constant(prime_limit: int = 10**6) -> float:
    """prod_{p odd} (1 - 1/(p-1)^2), Euler product truncated at prime_limit
    with an integral tail correction (>= 10 significant digits)."""
    primes = sieve_primes(prime_limit)[1:].astype(np.float64)  # drop p = 2
    log_prod = np.sum(np.log1p(-1.0 / (primes - 1.0) ** 2))
    # sum_{p > P} log(1 - (p-1)^-2) ~ -int_P^inf dt / ((t-1)^2 log t),
    # integrated after the substitution u = 1/t to keep quad accurate
    tail, _ = quad(
        lambda u: 1.0 / ((1.0 - u) ** 2 * -math.log(u)), 0.0, 1.0 / prime_limit
    )
    return math.exp(log_prod - tail)


def singular_series(k: int) -> float:
    """Hardy-Littlewood prime-pair constant for shift k (zero for odd or zero k)."""
    k = abs(k)
    if k == 0 or k % 2 == 1:
        return 0.0
    value = 2.0 * twin_prime_constant()
    for p, _ in factorize(k).factors:
        if p != 2:
            value *= (p - 1.0) / (p - 2.0)
    return value


def singular_series_average(y: int, q: int) -> tuple[float, float, float]:
    """Weighted average sum_{j<=y} S(jq)(1 - j/y) against its predicted main term.

    Returns (lhs, main, residual) with residual = lhs - main.
    """
    if y < 2:
        raise ValueError("y must be >= 2")
    base = 2.0 * twin_prime_constant()
    q_odd_part = [p for p, _ in factorize(q).factors if p != 2]
    q_factor = 1.0
    for p in q_odd_part:
        q_factor *= (p - 1.0) / (p - 2.0)

    # ratio[j] = prod_{p | j, p odd, p not | q} (p-1)/(p-2)
    ratio = np.full(y + 1, base * q_factor)
    for p in sieve_primes(y)[1:]:
        if int(p) in q_odd_part:
            continue
        ratio[p::p] *= (p - 1.0) / (p - 2.0)
    j = np.arange(1, y + 1)
    even = (j * q) % 2 == 0
    weights = np.where(even, 1.0 - j / y, 0.0)
    lhs = math.fsum(ratio[1:] * weights)

    phi = euler_phi(q)
    log_p_sum = sum(math.log(p) / (p - 1) for p, _ in factorize(q).factors)
    main = (
        (y / 2.0) * (q / phi)
        - math.log(y) / 2.0
        - 0.5 * (EULER_GAMMA + LOG_2PI - 1.0 + log_p_sum)
    )
    return lhs, main, lhs - main


@lru_cache(maxsize=1)
def hooley_constant(prime_limit: int = 10**7) -> float:
    """gamma + log(2 pi) + 1 + sum_p log p / (p (p-1)), to >= 8 digits."""
    total = 0.0
    for seg in iter_prime_segments(prime_limit):
        p = seg.astype(np.float64)
        total += float(np.sum(np.log(p) / (p * (p - 1.0))))
    # sum_{p > P} log p / (p(p-1)) ~ int_P^inf dt / (t(t-1)) = -log(1 - 1/P)
    total += -math.log1p(-1.0 / prime_limit)
    return EULER_GAMMA + LOG_2PI + 1.0 + total
