"""Exact modular and p-adic arithmetic primitives.

Everything here is integer-exact and pure: residues, modular inverses,
CRT recombination, Legendre symbols, p-adic valuations, square roots
modulo odd prime powers (Tonelli-Shanks lifted by Hensel), and the
truncated inverse-square-root binomial series used by the correlation
character sums.  No floating point enters this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Residue",
    "PrimePower",
    "Valuation",
    "NonInvertible",
    "ModuliNotCoprime",
    "ZeroInput",
    "EvenPrime",
    "NonResidue",
    "is_prime",
    "mod_pow",
    "mod_inv",
    "crt_combine",
    "legendre",
    "valuation",
    "valuation_capped",
    "sqrt_mod_pp",
    "inv_sqrt_series",
]


class NonInvertible(ArithmeticError):
    """gcd(a, q) > 1: the residue has no inverse.

    Callers catch this to take a degenerate branch (for example a
    Kloosterman sum collapsing to a Ramanujan-type sum).
    """


class ModuliNotCoprime(ArithmeticError):
    """CRT recombination was asked for moduli sharing a common factor."""


class ZeroInput(ArithmeticError):
    """valuation(0, p) is infinite; this function refuses 0."""


class EvenPrime(ArithmeticError):
    """p = 2 is outside the supported range (odd prime powers only)."""


class NonResidue(ArithmeticError):
    """The leading coefficient t is a quadratic non-residue mod p."""


def is_prime(n: int) -> bool:
    """Primality by trial division; adequate for desk-scale moduli."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Residue:
    """An integer value reduced into [0, modulus)."""

    value: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        object.__setattr__(self, "value", self.value % self.modulus)


@dataclass(frozen=True)
class PrimePower:
    """q = p^gamma with p prime (checked) and gamma >= 1."""

    p: int
    gamma: int

    def __post_init__(self) -> None:
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")

    @property
    def q(self) -> int:
        return self.p**self.gamma


@dataclass(frozen=True)
class Valuation:
    """n = p^nu * unit with gcd(unit, p) = 1."""

    nu: int
    unit: int


def mod_pow(a: Residue, e: int) -> Residue:
    """a^e mod q by square-and-multiply; O(log e) multiplications."""
    if e < 0:
        raise ValueError(f"exponent must be nonnegative, got {e}")
    q = a.modulus
    base = a.value % q
    acc = 1 % q
    while e:
        if e & 1:
            acc = (acc * base) % q
        base = (base * base) % q
        e >>= 1
    return Residue(acc, q)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_x, x = x, old_x - qt * x
        old_y, y = y, old_y - qt * y
    return old_r, old_x, old_y


def mod_inv(a: Residue) -> Residue:
    """Inverse of a mod q by extended Euclid; raises NonInvertible."""
    q = a.modulus
    if q == 1:
        return Residue(0, 1)
    g, x, _ = _ext_gcd(a.value % q, q)
    if g != 1:
        raise NonInvertible(f"gcd({a.value}, {q}) = {g} > 1")
    return Residue(x, q)


def crt_combine(parts: list[Residue]) -> Residue:
    """The unique residue mod prod(q_i) matching every part."""
    if not parts:
        raise ValueError("crt_combine needs at least one part")
    acc_v, acc_q = parts[0].value, parts[0].modulus
    for part in parts[1:]:
        g = math.gcd(acc_q, part.modulus)
        if g != 1:
            raise ModuliNotCoprime(
                f"moduli {acc_q} and {part.modulus} share factor {g}"
            )
        # acc_v + acc_q*t == part.value (mod part.modulus)
        t = ((part.value - acc_v) * mod_inv(Residue(acc_q, part.modulus)).value) % part.modulus
        acc_v = acc_v + acc_q * t
        acc_q = acc_q * part.modulus
    return Residue(acc_v, acc_q)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for odd prime p; 0 when p | a."""
    if p == 2 or not is_prime(p):
        raise ValueError(f"p = {p} must be an odd prime")
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return 1 if r == 1 else -1


def valuation(n: int, p: int) -> Valuation:
    """Largest nu with p^nu | n, plus the coprime cofactor; refuses n = 0."""
    if n == 0:
        raise ZeroInput("valuation of 0 is infinite")
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    nu = 0
    while n % p == 0:
        n //= p
        nu += 1
    return Valuation(nu, n)


def valuation_capped(n: int, p: int, cap: int) -> int:
    """min(nu_p(n), cap), with nu_p(0) treated as +infinity."""
    if n == 0:
        return cap
    return min(valuation(n, p).nu, cap)


def _tonelli_shanks(beta: int, p: int) -> int:
    """One square root of beta mod odd prime p; assumes (beta/p) = +1."""
    beta %= p
    if p % 4 == 3:
        return pow(beta, (p + 1) // 4, p)
    # Write p - 1 = s * 2^e with s odd.
    s, e = p - 1, 0
    while s % 2 == 0:
        s //= 2
        e += 1
    # Any quadratic non-residue will do as the generator of the 2-part.
    n = 2
    while legendre(n, p) != -1:
        n += 1
    x = pow(beta, (s + 1) // 2, p)
    b = pow(beta, s, p)
    g = pow(n, s, p)
    r = e
    while True:
        t, m = b, 0
        while t != 1:
            t = (t * t) % p
            m += 1
        if m == 0:
            return x
        gs = pow(g, 1 << (r - m - 1), p)
        x = (x * gs) % p
        b = (b * gs * gs) % p
        g = (gs * gs) % p
        r = m


def sqrt_mod_pp(beta: int, pp: PrimePower) -> tuple[int, int] | None:
    """Both square roots of beta mod p^gamma, or None for a non-residue.

    Tonelli-Shanks at level p, then Hensel lifting to gamma.  Returns
    the pair ordered smaller-first; requires p odd and gcd(beta, p) = 1.
    """
    if pp.p == 2:
        raise EvenPrime("square roots mod 2^gamma are not supported")
    q = pp.q
    beta %= q
    if beta % pp.p == 0:
        raise ValueError(f"beta = {beta} must be coprime to p = {pp.p}")
    if legendre(beta, pp.p) == -1:
        return None
    r = _tonelli_shanks(beta, pp.p)
    mod = pp.p
    while mod < q:
        # Newton step r -> r - (r^2 - beta)/(2r), exact since 2r is a unit.
        mod = min(mod * mod, q)
        r = (r - (r * r - beta) * mod_inv(Residue(2 * r, mod)).value) % mod
    return (r, q - r) if r <= q - r else (q - r, r)


def inv_sqrt_series(s: int, t: int, a: int, pp: PrimePower, u: int) -> Residue:
    """Truncated binomial series for (s*p^(gamma-u)*a + t)^(-1/2) mod p^gamma.

    Computes x = sum_{i=0}^{I} binom(-1/2, i) * t^(-i-1/2) * (s*p^(gamma-u))^i * a^i
    with I minimal such that (I+1)*(gamma-u) >= gamma, so that
    x^2 * (s*p^(gamma-u)*a + t) == 1 (mod p^gamma).  The square-root branch
    t^(1/2) is the root with the smallest representative; binom(-1/2, i) is
    (-1)^i * C(2i, i) / 4^i, whose denominator is a power of 2 and hence
    invertible mod any odd prime power for every i.
    Raises NonResidue when (t/p) = -1.
    """
    if pp.p == 2:
        raise EvenPrime("series requires an odd prime")
    if not (0 <= u < pp.gamma):
        raise ValueError(f"need 0 <= u < gamma, got u={u}, gamma={pp.gamma}")
    q = pp.q
    if math.gcd(t, pp.p) != 1:
        raise ValueError(f"t = {t} must be coprime to p = {pp.p}")
    roots = sqrt_mod_pp(t % q, pp)
    if roots is None:
        raise NonResidue(f"t = {t} is not a square mod {pp.p}")
    ell = roots[0]
    depth = pp.gamma - u
    n_terms = -(-pp.gamma // depth)  # ceil(gamma / depth) terms, i = 0..I
    t_inv = mod_inv(Residue(t, q)).value
    ell_inv = mod_inv(Residue(ell, q)).value
    step = (s % q) * pow(pp.p, depth, q) % q * (a % q) % q  # (s p^(gamma-u) a)
    acc = 0
    term_pow = 1  # step^i
    for i in range(n_terms):
        binom = (-1) ** i * math.comb(2 * i, i) * mod_inv(Residue(pow(4, i, q), q)).value
        acc = (acc + binom * pow(t_inv, i, q) % q * ell_inv % q * term_pow) % q
        term_pow = (term_pow * step) % q
    return Residue(acc, q)
