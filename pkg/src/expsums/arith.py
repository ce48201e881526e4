"""Small number theory toolkit: primality, factorization, prime sweeps."""

from __future__ import annotations

from math import gcd, isqrt

# Deterministic Miller-Rabin witnesses for n < 3.3e24 (covers all 64-bit n).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization as a sorted list of (p, e)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    p = 2
    while n > 1 and not is_prime(n):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return sorted(out)


def prime_power(n: int) -> tuple[int, int] | None:
    """Return (p, m) if n = p^m with m >= 1, else None."""
    f = factorize(n) if n > 1 else []
    if len(f) == 1:
        return f[0]
    return None


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def prime_powers_up_to(n: int, min_exponent: int = 1) -> list[tuple[int, int]]:
    """All (p, m) with p^m <= n and m >= min_exponent, sorted by p^m."""
    out = []
    for p in primes_up_to(n):
        q, m = p, 1
        while q <= n:
            if m >= min_exponent:
                out.append((p, m))
            q *= p
            m += 1
    return sorted(out, key=lambda t: (t[0] ** t[1], t[0]))


def is_power_free(n: int, k: int) -> bool:
    """True when no nontrivial k-th power divides n (k=2: square-free)."""
    return all(e < k for _, e in factorize(n)) if n > 1 else True


def units(n: int) -> list[int]:
    """Residues u in [1, n) with gcd(u, n) = 1 (u = 0 for n = 1)."""
    if n == 1:
        return [0]
    return [u for u in range(1, n) if gcd(u, n) == 1]


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v
