"""Exact arithmetic and enumeration in F_q[x] for prime q = 1 (mod 4).

Polynomials are represented as tuples of integers in {0, ..., q-1},
lowest degree first: a_0 + a_1 x + ... + a_n x^n <-> (a_0, a_1, ..., a_n).
The leading coefficient is nonzero; the zero polynomial is the empty
tuple (). A monic polynomial of degree n has a_n = 1; the constant 1,
i.e. (1,), is a valid monic input everywhere. The norm of f is
|f| = q^deg(f).

Enumeration of the q^n monic polynomials of degree n is in lexicographic
order on the coefficient vector (a_0, ..., a_{n-1}); the rank of a monic
polynomial in that order is sum_i a_i q^{n-1-i}. This order is fixed so
cached ensembles are reproducible.

Multiplicative functions: the von Mangoldt function Lambda(f) = deg(P)
when f = c P^j for an irreducible P (else 0), the k-th divisor function
tau_k (number of ordered factorizations into k monic parts,
tau_k(P^j) = C(j+k-1, k-1)), the Moebius function, and the square-free
splitting f = f1 * f2^2 with f1 square-free.

Counting facts used as cross-checks throughout:
    pi_q(n)  = (1/n) sum_{d|n} mu(d) q^{n/d}     (irreducibles of degree n)
    #H_d     = q if d = 1, else q^{d-1}(q-1)     (monic square-free, degree d)
    sum_{f in M_n} Lambda(f) = q^n

Everything here is pure and operates on immutable tuples; the numpy
helpers (coefficient matrices, sieve masks) return freshly allocated or
cached read-only arrays and are safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator

import numpy as np

Poly = tuple[int, ...]

ZERO: Poly = ()
ONE: Poly = (1,)


def check_q(q: int) -> int:
    """Validate the ground-field size: q must be prime and q = 1 (mod 4)."""
    if not isinstance(q, int) or q < 5:
        raise ValueError(f"q must be a prime >= 5, got {q!r}")
    if q % 4 != 1:
        raise ValueError(f"q must be congruent to 1 mod 4, got {q}")
    for p in range(2, math.isqrt(q) + 1):
        if q % p == 0:
            raise ValueError(f"q must be prime, got {q} = {p} * {q // p}")
    return q


# ---------------------------------------------------------------------------
# basic arithmetic on coefficient tuples
# ---------------------------------------------------------------------------

def normalize(q: int, coeffs) -> Poly:
    """Reduce coefficients mod q and strip trailing zeros."""
    out = [c % q for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def degree(f: Poly) -> int:
    """Degree of f; the zero polynomial has degree -1 by convention."""
    return len(f) - 1


def is_monic(f: Poly) -> bool:
    return bool(f) and f[-1] == 1


def norm(q: int, f: Poly) -> int:
    """|f| = q^deg(f). Undefined (raises) for the zero polynomial."""
    if not f:
        raise ValueError("the zero polynomial has no norm")
    return q ** degree(f)


def add(q: int, f: Poly, g: Poly) -> Poly:
    n = max(len(f), len(g))
    return normalize(q, [(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)
                         for i in range(n)])


def sub(q: int, f: Poly, g: Poly) -> Poly:
    n = max(len(f), len(g))
    return normalize(q, [(f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)
                         for i in range(n)])


def mul(q: int, f: Poly, g: Poly) -> Poly:
    if not f or not g:
        return ZERO
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return normalize(q, out)


def scale(q: int, c: int, f: Poly) -> Poly:
    return normalize(q, [c * a for a in f])


def divmod_poly(q: int, f: Poly, g: Poly) -> tuple[Poly, Poly]:
    """Quotient and remainder with deg(r) < deg(g)."""
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(f)
    dg = degree(g)
    inv = pow(g[-1], q - 2, q)
    quo = [0] * max(0, len(r) - dg)
    while len(r) - 1 >= dg and r:
        c = r[-1] * inv % q
        k = len(r) - 1 - dg
        quo[k] = c
        for i, b in enumerate(g):
            r[k + i] = (r[k + i] - c * b) % q
        while r and r[-1] == 0:
            r.pop()
    return tuple(quo), tuple(r)


def mod(q: int, f: Poly, g: Poly) -> Poly:
    return divmod_poly(q, f, g)[1]


def gcd(q: int, f: Poly, g: Poly) -> Poly:
    """Monic gcd; gcd(0, 0) = 0."""
    while g:
        f, g = g, mod(q, f, g)
    if not f:
        return ZERO
    return to_monic(q, f)[1]


def to_monic(q: int, f: Poly) -> tuple[int, Poly]:
    """Split f = c * f0 with f0 monic; return (c, f0)."""
    if not f:
        raise ValueError("zero polynomial has no monic part")
    c = f[-1]
    if c == 1:
        return 1, f
    inv = pow(c, q - 2, q)
    return c, tuple(a * inv % q for a in f)


def pow_mod(q: int, f: Poly, e: int, m: Poly) -> Poly:
    r: Poly = ONE
    f = mod(q, f, m)
    while e:
        if e & 1:
            r = mod(q, mul(q, r, f), m)
        f = mod(q, mul(q, f, f), m)
        e >>= 1
    return r


def derivative(q: int, f: Poly) -> Poly:
    return normalize(q, [i * f[i] for i in range(1, len(f))])


def is_squarefree(q: int, f: Poly) -> bool:
    """f is square-free iff gcd(f, f') is constant."""
    if not f:
        return False
    d = derivative(q, f)
    if not d:
        return degree(f) == 0
    return degree(gcd(q, f, d)) == 0


def evaluate(q: int, f: Poly, x: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % q
    return acc


# ---------------------------------------------------------------------------
# string form (used by the CLI for twist polynomials)
# ---------------------------------------------------------------------------

def to_string(f: Poly) -> str:
    if not f:
        return "0"
    parts = []
    for i in range(degree(f), -1, -1):
        c = f[i]
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        elif i == 1:
            parts.append("x" if c == 1 else f"{c}x")
        else:
            parts.append(f"x^{i}" if c == 1 else f"{c}x^{i}")
    return "+".join(parts)


def from_string(q: int, s: str) -> Poly:
    """Parse sums of monomials like 'x^3+2x+1', 'x', '1'."""
    s = s.replace(" ", "").replace("**", "^").replace("*", "")
    if not s:
        raise ValueError("empty polynomial string")
    s = s.replace("-", "+-")
    coeffs: dict[int, int] = {}
    for term in s.split("+"):
        if not term:
            continue
        neg = term.startswith("-")
        if neg:
            term = term[1:]
        if "x" in term:
            head, _, tail = term.partition("x")
            c = int(head) if head else 1
            e = int(tail[1:]) if tail.startswith("^") else (1 if not tail else int(tail))
        else:
            c, e = int(term), 0
        if neg:
            c = -c
        coeffs[e] = coeffs.get(e, 0) + c
    out = [0] * (max(coeffs) + 1)
    for e, c in coeffs.items():
        out[e] = c
    return normalize(q, out)


# ---------------------------------------------------------------------------
# enumeration (canonical order) and numpy coefficient matrices
# ---------------------------------------------------------------------------

def enumerate_monic(q: int, n: int) -> Iterator[Poly]:
    """All q^n monic polynomials of degree n, canonical (lexicographic) order."""
    if n < 0:
        return
    if n == 0:
        yield ONE
        return
    for low in product(range(q), repeat=n):
        yield low + (1,)


def monic_rank(q: int, f: Poly) -> int:
    """Rank of a monic polynomial within its degree class, canonical order."""
    if not is_monic(f):
        raise ValueError("rank is defined for monic polynomials")
    n = degree(f)
    return sum(f[i] * q ** (n - 1 - i) for i in range(n))


def monic_from_rank(q: int, n: int, r: int) -> Poly:
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    for i in range(n):
        coeffs[i] = (r // q ** (n - 1 - i)) % q
    return tuple(coeffs)


@lru_cache(maxsize=None)
def monic_coeff_matrix(q: int, n: int) -> np.ndarray:
    """(q^n, n+1) int8 matrix of monic degree-n coefficient rows, canonical order."""
    count = q ** n
    out = np.empty((count, n + 1), dtype=np.int8)
    r = np.arange(count, dtype=np.int64)
    for i in range(n):
        out[:, i] = (r // q ** (n - 1 - i)) % q
    out[:, n] = 1
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def residue_coeff_matrix(q: int, n: int) -> np.ndarray:
    """(q^n, n) int8 matrix of all residues of degree < n.

    Row r holds the residue with positional index r = sum_i c_i q^i
    (little-endian weights, the indexing used by the character tables).
    """
    count = q ** n
    out = np.empty((count, n), dtype=np.int8)
    r = np.arange(count, dtype=np.int64)
    for i in range(n):
        out[:, i] = (r // q ** i) % q
    out.setflags(write=False)
    return out


def residue_index(q: int, f: Poly, n: int) -> int:
    """Positional index sum_i f_i q^i of a residue of degree < n."""
    return sum(f[i] * q ** i for i in range(len(f)))


def _vec_products_ranks(q: int, P: Poly, m: int) -> np.ndarray:
    """Canonical ranks of P*h over all monic h of degree m (P monic)."""
    d = degree(P)
    n = d + m
    H = monic_coeff_matrix(q, m).astype(np.int64)
    prod_ = np.zeros((H.shape[0], n + 1), dtype=np.int64)
    for j, c in enumerate(P):
        if c:
            prod_[:, j:j + m + 1] += c * H
    prod_ %= q
    weights = np.array([q ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    return prod_[:, :n] @ weights


@lru_cache(maxsize=None)
def irreducible_mask(q: int, n: int) -> np.ndarray:
    """Boolean mask over M_n (canonical order): True iff irreducible.

    Sieve: a composite of degree n has an irreducible factor of degree
    <= n/2, so it suffices to strike products P*h for those P.
    """
    count = q ** n
    mask = np.ones(count, dtype=bool)
    if n == 1:
        return mask
    for d in range(1, n // 2 + 1):
        for P in irreducibles(q, d):
            mask[_vec_products_ranks(q, P, n - d)] = False
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=None)
def irreducibles(q: int, n: int) -> tuple[Poly, ...]:
    """All monic irreducibles of degree n, canonical order."""
    mask = irreducible_mask(q, n)
    ranks = np.flatnonzero(mask)
    return tuple(monic_from_rank(q, n, int(r)) for r in ranks)


def sieve_irreducibles(q: int, max_deg: int) -> dict[int, tuple[Poly, ...]]:
    """Monic irreducibles grouped by degree, 1..max_deg, by explicit sieve."""
    if max_deg < 1:
        raise ValueError("max_deg must be >= 1")
    return {n: irreducibles(q, n) for n in range(1, max_deg + 1)}


def sieve_count(q: int, n: int) -> int:
    """Number of irreducibles of degree n found by the explicit sieve."""
    return int(irreducible_mask(q, n).sum())


def _mobius_int(n: int) -> int:
    if n == 1:
        return 1
    m, res = n, 1
    p = 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            res = -res
        p += 1
    if m > 1:
        res = -res
    return res


def pi_q(q: int, n: int) -> int:
    """Prime Polynomial Theorem count: pi_q(n) = (1/n) sum_{d|n} mu(d) q^{n/d}."""
    total = sum(_mobius_int(d) * q ** (n // d) for d in range(1, n + 1) if n % d == 0)
    assert total % n == 0
    return total // n


def is_irreducible(q: int, f: Poly) -> bool:
    """Irreducibility test: trial division for deg <= 6, distinct-degree gcd above."""
    n = degree(f)
    if n < 1:
        raise ValueError("irreducibility is defined for degree >= 1")
    if not is_monic(f):
        _, f = to_monic(q, f)
    if n == 1:
        return True
    if n <= 6:
        for d in range(1, n // 2 + 1):
            for P in irreducibles(q, d):
                if not mod(q, f, P):
                    return False
        return True
    # f irreducible iff gcd(f, x^{q^d} - x) = 1 for all d <= n/2
    x: Poly = (0, 1)
    t = x
    for d in range(1, n // 2 + 1):
        t = pow_mod(q, t, q, f)      # x^{q^d} mod f
        if degree(gcd(q, sub(q, t, x), f)) > 0:
            return False
    return True


# ---------------------------------------------------------------------------
# square-free polynomials
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def squarefree_mask(q: int, n: int) -> np.ndarray:
    """Boolean mask over M_n: True iff square-free (strike multiples of P^2)."""
    count = q ** n
    mask = np.ones(count, dtype=bool)
    for d in range(1, n // 2 + 1):
        for P in irreducibles(q, d):
            P2 = mul(q, P, P)
            mask[_vec_products_ranks(q, P2, n - 2 * d)] = False
    mask.setflags(write=False)
    return mask


def squarefree_count(q: int, d: int) -> int:
    """#H_d = q if d = 1, else q^{d-1}(q-1)."""
    if d < 1:
        raise ValueError("square-free enumeration needs degree >= 1")
    return q if d == 1 else q ** (d - 1) * (q - 1)


def enumerate_squarefree(q: int, d: int) -> Iterator[Poly]:
    """Monic square-free polynomials of degree d (the set H_d), canonical order."""
    mask = squarefree_mask(q, d)
    for r in np.flatnonzero(mask):
        yield monic_from_rank(q, d, int(r))


def squarefree_ranks(q: int, d: int) -> np.ndarray:
    """Canonical ranks of H_d inside M_d."""
    return np.flatnonzero(squarefree_mask(q, d))


# ---------------------------------------------------------------------------
# factorization and multiplicative functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Factorization:
    """Prime factorization of a monic polynomial: ((P, multiplicity), ...)."""
    factors: tuple[tuple[Poly, int], ...]

    def reconstruct(self, q: int) -> Poly:
        out: Poly = ONE
        for P, e in self.factors:
            for _ in range(e):
                out = mul(q, out, P)
        return out

    def distinct_primes(self) -> tuple[Poly, ...]:
        return tuple(P for P, _ in self.factors)


def factorize(q: int, f: Poly) -> Factorization:
    """Factor a monic polynomial by trial division over sieved irreducibles."""
    if not is_monic(f):
        raise ValueError("factorize expects a monic polynomial")
    out: list[tuple[Poly, int]] = []
    rem = f
    d = 1
    while degree(rem) > 0:
        if d > degree(rem) // 2:
            out.append((rem, 1))
            break
        for P in irreducibles(q, d):
            if degree(rem) == 0:
                break
            e = 0
            while True:
                quo, r = divmod_poly(q, rem, P)
                if r:
                    break
                rem = quo
                e += 1
            if e:
                out.append((P, e))
        d += 1
    out.sort(key=lambda t: (degree(t[0]), monic_rank(q, t[0])))
    return Factorization(tuple(out))


def von_mangoldt(q: int, f: Poly) -> int:
    """Lambda(f): deg(P) if f = c P^j for irreducible P, j >= 1; else 0."""
    if not f:
        return 0
    if degree(f) == 0:
        return 0
    _, f0 = to_monic(q, f)
    fac = factorize(q, f0).factors
    if len(fac) == 1:
        return degree(fac[0][0])
    return 0


def tau_k(q: int, f: Poly, k: int) -> int:
    """k-th divisor function: tau_k(P^j) = C(j+k-1, k-1), multiplicative."""
    if k < 1:
        raise ValueError("tau_k needs k >= 1")
    if not is_monic(f):
        raise ValueError("tau_k expects a monic polynomial")
    out = 1
    for _, e in factorize(q, f).factors:
        out *= math.comb(e + k - 1, k - 1)
    return out


def mobius(q: int, f: Poly) -> int:
    if not is_monic(f):
        raise ValueError("mobius expects a monic polynomial")
    fac = factorize(q, f).factors
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def split_squarefree_part(q: int, ell: Poly) -> tuple[Poly, Poly]:
    """Write ell = ell1 * ell2^2 with ell1 square-free; return (ell1, ell2)."""
    if not is_monic(ell):
        raise ValueError("split expects a monic polynomial")
    ell1: Poly = ONE
    ell2: Poly = ONE
    for P, e in factorize(q, ell).factors:
        if e % 2:
            ell1 = mul(q, ell1, P)
        half = e // 2
        for _ in range(half):
            ell2 = mul(q, ell2, P)
    return ell1, ell2


def lambda_sum_brute(q: int, n: int) -> int:
    """sum_{f in M_n} Lambda(f) by enumerating prime powers of degree n."""
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += d * len(irreducibles(q, d))
    return total


def lambda_sum_formula(q: int, n: int) -> int:
    """Same sum through the closed-form pi_q (no enumeration)."""
    return sum(d * pi_q(q, d) for d in range(1, n + 1) if n % d == 0)
