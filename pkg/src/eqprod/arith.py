"""Integer plumbing: prime sieve, primality, budgeted factoring.

Everything here is deterministic. The factoring routine does trial division
by sieved primes first and spends the remaining budget on Brent-cycle Pollard
rho; the budget counts rho iterations, so callers can reason about cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

DEFAULT_TRIAL_BOUND = 10**6
DEFAULT_RHO_BUDGET = 2_000_000

# Deterministic Miller-Rabin witnesses for n < 3.3 * 10^24 (covers 2^64).
_SMALL_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
# Above 2^64: strong-probable-prime test with the first 40 primes as fixed bases.
_LARGE_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113,
                127, 131, 137, 139, 149, 151, 157, 163, 167, 173)

_sieve_cache: dict[int, list[int]] = {}


def sieve_primes(bound: int) -> list[int]:
    """All primes <= bound, ascending. bound < 2 gives []."""
    if bound < 2:
        return []
    cached = _sieve_cache.get(bound)
    if cached is not None:
        return cached
    flags = bytearray([1]) * (bound + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(bound) + 1):
        if flags[p]:
            flags[p * p:: p] = bytearray(len(range(p * p, bound + 1, p)))
    primes = [i for i in range(bound + 1) if flags[i]]
    if bound <= DEFAULT_TRIAL_BOUND:
        _sieve_cache[bound] = primes
    return primes


def _is_strong_probable_prime(n: int, base: int) -> bool:
    if base % n == 0:
        return True
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin. Deterministic below 2^64, 40 fixed prime bases above."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    bases = _SMALL_BASES if n < 2**64 else _LARGE_BASES
    return all(_is_strong_probable_prime(n, b) for b in bases)


@dataclass
class Factorization:
    """Prime -> exponent map plus whatever the budget left unfactored.

    Invariant: prod(p^e) * cofactor == |n|, every mapped p passes
    is_probable_prime, and complete <=> cofactor == 1.
    """

    n: int
    factors: dict[int, int] = field(default_factory=dict)
    cofactor: int = 1
    complete: bool = True

    def check(self) -> bool:
        prod = self.cofactor
        for p, e in self.factors.items():
            prod *= p**e
        return prod == abs(self.n) and self.complete == (self.cofactor == 1)


def _brent_rho(n: int, budget: int) -> tuple[int, int]:
    """One Brent-cycle rho attempt sweep.

    Returns (divisor, iterations_used); divisor == n means failure within
    budget. n must be odd, composite, > 1 and not a perfect power of a
    prime we already know; callers guarantee compositeness.
    """
    used = 0
    # Deterministic parameter sweep instead of random restarts.
    for c in range(1, 1000):
        y, r, q = 2, 1, 1
        g = 1
        m = 128
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                used += min(m, r - k)
                if used > budget:
                    return n, used
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            # Backtrack to find the first collision one step at a time.
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
                used += 1
                if used > budget:
                    return n, used
        if g != n:
            return g, used
        # g == n even after backtracking: retry with the next c.
    return n, used


def factor(n: int, budget: int = DEFAULT_RHO_BUDGET,
           trial_bound: int = DEFAULT_TRIAL_BOUND) -> Factorization:
    """Factor |n|. Trial division to trial_bound, then budgeted Brent rho.

    n == 0 is an error. The sign is dropped; callers track it.
    """
    if n == 0:
        raise DomainError("factor: n must be nonzero")
    n = abs(n)
    fz = Factorization(n=n)
    if n == 1:
        return fz
    for p in sieve_primes(trial_bound):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            fz.factors[p] = e
    if n == 1:
        return fz
    if n <= trial_bound * trial_bound or is_probable_prime(n):
        # Remainder below the trial square is prime by construction.
        fz.factors[n] = fz.factors.get(n, 0) + 1
        return fz

    remaining = budget
    stack = [n]
    while stack:
        m = stack.pop()
        if is_probable_prime(m):
            fz.factors[m] = fz.factors.get(m, 0) + 1
            continue
        d, used = _brent_rho(m, remaining)
        remaining -= used
        if d == m or remaining <= 0:
            # Budget gone. Sweep up what is left: primes still count.
            for leftover in [m] + stack:
                if leftover != m and is_probable_prime(leftover):
                    fz.factors[leftover] = fz.factors.get(leftover, 0) + 1
                else:
                    fz.cofactor *= leftover
            stack.clear()
            break
        stack.append(d)
        stack.append(m // d)
    fz.complete = fz.cofactor == 1
    return fz


def valuation(n: int, p: int) -> int:
    """Exponent of p in n. n must be nonzero."""
    if n == 0:
        raise DomainError("valuation: n must be nonzero")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v
