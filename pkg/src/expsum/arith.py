"""Multiplicative-function machinery.

Divisor functions and their sieved tables, Moebius and Euler-phi
accessors on exact factorizations, twisted divisor sums sigma_w, the
two-sided sigma_{0,0} identity, and Ramanujan sums with a closed form
cross-checked against the direct exponential sum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Factorization",
    "DivisorTable",
    "IdentityViolation",
    "factorize",
    "divisor_table",
    "divisors",
    "sigma_w",
    "sigma00",
    "ramanujan_sum",
    "d_exact",
    "d3_exact",
]

_FACTOR_CAP = 10**12


class IdentityViolation(AssertionError):
    """The two sides of an exact identity disagreed (implementation bug)."""


@dataclass(frozen=True)
class Factorization:
    """n = prod p_i^{e_i} with p_i strictly increasing."""

    n: int
    pairs: tuple[tuple[int, int], ...]

    def mobius(self) -> int:
        if any(e > 1 for _, e in self.pairs):
            return 0
        return -1 if len(self.pairs) % 2 else 1

    def phi(self) -> int:
        out = 1
        for p, e in self.pairs:
            out *= p ** (e - 1) * (p - 1)
        return out

    def omega(self) -> int:
        return len(self.pairs)

    def squarefree_part(self) -> int:
        """Product of the primes appearing to the first power exactly."""
        out = 1
        for p, e in self.pairs:
            if e == 1:
                out *= p
        return out

    def squarefull_part(self) -> int:
        """Complementary product of the prime powers with exponent >= 2."""
        out = 1
        for p, e in self.pairs:
            if e >= 2:
                out *= p**e
        return out

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.pairs)

    def divisors(self) -> list[int]:
        out = [1]
        for p, e in self.pairs:
            out = [d * p**j for d in out for j in range(e + 1)]
        return sorted(out)


@lru_cache(maxsize=100_000)
def factorize(n: int) -> Factorization:
    """Exact factorization by trial division; 1 <= n <= 10^12."""
    if not 1 <= n <= _FACTOR_CAP:
        raise ValueError(f"n = {n} outside [1, {_FACTOR_CAP}]")
    m = n
    pairs: list[tuple[int, int]] = []
    f = 2
    while f * f <= m:
        if m % f == 0:
            e = 0
            while m % f == 0:
                m //= f
                e += 1
            pairs.append((f, e))
        f += 1 if f == 2 else 2
    if m > 1:
        pairs.append((m, 1))
    return Factorization(n, tuple(pairs))


def divisors(n: int) -> list[int]:
    return factorize(n).divisors()


def d_exact(n: int) -> int:
    """d(n) = prod (e_i + 1), exact from the factorization."""
    out = 1
    for _, e in factorize(n).pairs:
        out *= e + 1
    return out


def d3_exact(n: int) -> int:
    """d_3(n) = prod (e_i + 1)(e_i + 2)/2, exact from the factorization."""
    out = 1
    for _, e in factorize(n).pairs:
        out *= (e + 1) * (e + 2) // 2
    return out


@dataclass(frozen=True)
class DivisorTable:
    """values[n] = d_k(n) for 1 <= n <= X (values[0] unused, = 0)."""

    k: int
    X: int
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values.setflags(write=False)


@lru_cache(maxsize=8)
def divisor_table(k: int, X: int) -> DivisorTable:
    """Sieve d_k as the k-fold Dirichlet convolution of 1; exact uint32."""
    if k not in (2, 3):
        raise ValueError(f"k must be 2 or 3, got {k}")
    if X < 1 or (k == 3 and X > 10**8):
        raise ValueError(f"X = {X} outside desk-scale range")
    d2 = np.zeros(X + 1, dtype=np.uint32)
    for i in range(1, X + 1):
        d2[i::i] += 1
    if k == 2:
        return DivisorTable(2, X, d2)
    d3 = np.zeros(X + 1, dtype=np.uint32)
    for i in range(1, X + 1):
        d3[i::i] += d2[1 : X // i + 1]
    return DivisorTable(3, X, d3)


def sigma_w(n: int, w: complex) -> complex:
    """sigma_w(n) = sum of d^w over divisors d | n.

    Returns an exact Python integer when w is a nonnegative integer,
    otherwise a complex value.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    ds = divisors(n)
    if isinstance(w, int) or (isinstance(w, float) and w.is_integer() and w >= 0):
        wi = int(w)
        if wi >= 0:
            return sum(d**wi for d in ds)
    return sum(cmath.exp(w * math.log(d)) for d in ds)


def sigma00(k: int, l: int, check: bool = True) -> int:
    """The ternary-divisor count sum_{d1|l} sum_{d2|(l/d1), (d2,k)=1} 1.

    Evaluates both the literal double divisor sum and the equivalent
    Moebius convolution sum_{a | gcd(k,l)} mu(a) d_3(l/a); with
    check=True (the default) the two must agree exactly.
    """
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive")
    mobius_form = 0
    for a in divisors(math.gcd(k, l)):
        mu = factorize(a).mobius()
        if mu:
            mobius_form += mu * d3_exact(l // a)
    if check:
        literal = 0
        for d1 in divisors(l):
            for d2 in divisors(l // d1):
                if math.gcd(d2, k) == 1:
                    literal += 1
        if literal != mobius_form:
            raise IdentityViolation(
                f"sigma00({k},{l}): literal {literal} != moebius {mobius_form}"
            )
    return mobius_form


def ramanujan_sum(q: int, n: int, check: bool = False) -> int:
    """c_q(n) = sum over units alpha mod q of e(alpha*n/q), exactly.

    Closed form mu(q/g)*phi(q)/phi(q/g) with g = gcd(n, q); with
    check=True the direct complex sum is evaluated and compared to
    within 1e-9 * q.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    g = math.gcd(n, q)
    qg = q // g
    value = factorize(qg).mobius() * factorize(q).phi() // factorize(qg).phi()
    if check:
        direct = sum(
            cmath.exp(2j * math.pi * ((a * n) % q) / q)
            for a in range(1, q + 1)
            if math.gcd(a, q) == 1
        )
        if abs(direct - value) > 1e-9 * q:
            raise IdentityViolation(
                f"ramanujan_sum({q},{n}): closed form {value} vs direct {direct}"
            )
    return value
