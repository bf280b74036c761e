"""Quadratic characters and Gauss sums over F_q[x].

The quadratic residue symbol for an irreducible P is the Euler power
    (f/P) = f^((|P|-1)/2) mod P  in {-1, 0, 1},
extended to the Jacobi symbol (A/B) multiplicatively over the prime
factorization of a monic B. Since q = 1 (mod 4), reciprocity has no sign:
(A/B) = (B/A) for coprime monic A, B. A non-monic numerator c*A0 is
handled by the constant rule (c/B) = legendre(c)^deg(B), the unique
multiplicative extension consistent with the Euler power (the exponent
(|B|-1)/2 = ((q-1)/2)(1 + q + ... + q^(deg B - 1)) has the parity of
deg B).

The character attached to a monic D is chi_D(f) = (D/f).

The additive exponential on F_q((1/x)) is e(a) = exp(2 pi i a_1 / q)
where a_1 is the 1/x-coefficient of the Laurent expansion (the field
trace is the identity since q is prime). For a proper residue r mod f,
the 1/x-coefficient of r/f is simply the x^(deg f - 1) coefficient of r.

The generalized Gauss sum is
    G(V, chi_f) = sum_{u mod f} (u/f) e(u V / f),
summed over all |f| residues u (not only monic ones). For prime powers
it has a five-case closed form in terms of the multiplicity alpha of P
in V (alpha = infinity when V = 0):

    G(V, chi_{P^j}) = 0                        j <= alpha, j odd
                      phi(P^j)                 j <= alpha, j even
                      -|P|^(j-1)               j = alpha + 1, j even
                      (V1/P) |P|^(j-1/2)       j = alpha + 1, j odd
                      0                        j >= alpha + 2

with V = V1 P^alpha, and it is multiplicative: G(V, chi_{fh}) =
G(V, chi_f) G(V, chi_h) for coprime f, h. The direct sum and the closed
form are kept as two independent routes and compared in the test suite.

Character tables: for a monic f, char_table(q, f) tabulates (r/f) over
all |f| residues r indexed by r -> sum_i r_i q^i. Tables are built from
per-prime square tables and are the workhorse behind the exact
character-sum identities and the bulk L-polynomial computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import ffpoly
from .ffpoly import (ONE, ZERO, Poly, degree, divmod_poly, is_irreducible,
                     is_monic, mod, monic_coeff_matrix, mul, pow_mod,
                     residue_coeff_matrix, to_monic)

DEFAULT_GAUSS_BUDGET = 5 ** 6


class EnumerationBudgetError(ValueError):
    """Raised when a direct Gauss sum would enumerate too many residues."""


def legendre_const(q: int, c: int) -> int:
    """Quadratic character of the constant c in F_q: c^((q-1)/2) in {-1,0,1}."""
    c %= q
    if c == 0:
        return 0
    return 1 if pow(c, (q - 1) // 2, q) == 1 else -1


def residue_symbol(q: int, f: Poly, P: Poly) -> int:
    """(f/P) for irreducible P, by the Euler power f^((|P|-1)/2) mod P."""
    if not is_irreducible(q, P):
        raise ValueError(f"residue symbol needs an irreducible modulus, got {P}")
    e = (q ** degree(P) - 1) // 2
    r = pow_mod(q, f, e, P)
    if r == ZERO:
        return 0
    if r == ONE:
        return 1
    if r == (q - 1,):
        return -1
    raise AssertionError(f"Euler power not in {{0, +-1}}: modulus {P} is not prime")


def jacobi(q: int, A: Poly, B: Poly) -> int:
    """Jacobi symbol (A/B) for monic B, via Euclidean reduction.

    Uses reciprocity (A0/B) = (B/A0) for monic parts (q = 1 mod 4) and the
    constant rule (c/B) = legendre(c)^deg(B) when stripping leading
    coefficients. (A/1) = 1 for every A, including A = 0.
    """
    if not is_monic(B):
        raise ValueError("jacobi needs a monic denominator")
    t = 1
    A = mod(q, A, B)
    while True:
        if degree(B) == 0:
            return t
        if not A:
            return 0
        c = A[-1]
        if c != 1:
            if degree(B) % 2 == 1:
                t *= legendre_const(q, c)
            inv = pow(c, q - 2, q)
            A = tuple(a * inv % q for a in A)
        if degree(A) == 0:
            return t
        A, B = mod(q, B, A), A


@dataclass(frozen=True)
class QuadChar:
    """The quadratic character chi_D(f) = (D/f) attached to a monic D.

    The factorization of D is cached at construction; instances are
    immutable and freely shareable.
    """
    q: int
    D: Poly

    def __post_init__(self):
        if not is_monic(self.D):
            raise ValueError("character modulus must be monic")
        object.__setattr__(self, "_factors", ffpoly.factorize(self.q, self.D))

    @property
    def factors(self) -> ffpoly.Factorization:
        return self._factors  # type: ignore[attr-defined]

    def __call__(self, f: Poly) -> int:
        return jacobi(self.q, self.D, f)


def exp_e(q: int, a1: int) -> complex:
    """e(a) = exp(2 pi i a_1 / q) for the 1/x-coefficient a_1 (prime field)."""
    return complex(np.exp(2j * np.pi * (a1 % q) / q))


# ---------------------------------------------------------------------------
# character tables over residues
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _qpowers(q: int, n: int) -> np.ndarray:
    w = np.array([q ** i for i in range(n)], dtype=np.int64)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def reduction_matrix(q: int, f: Poly, width: int) -> np.ndarray:
    """(width, deg f) int64 matrix whose row i is x^i mod f."""
    d = degree(f)
    rows = np.zeros((width, d), dtype=np.int64)
    cur: Poly = ONE
    for i in range(width):
        for j, c in enumerate(cur):
            rows[i, j] = c
        # multiply by x and reduce
        cur = mod(q, (0,) + cur, f)
    rows.setflags(write=False)
    return rows


def _reduce_rows(q: int, coeff_rows: np.ndarray, f: Poly) -> np.ndarray:
    """Reduce polynomial coefficient rows mod f; returns (N, deg f) int64."""
    d = degree(f)
    width = coeff_rows.shape[1]
    R = reduction_matrix(q, f, width)
    return coeff_rows.astype(np.int64) @ R % q


@lru_cache(maxsize=None)
def square_table(q: int, P: Poly) -> np.ndarray:
    """int8 table over residues mod an irreducible P: (r/P) at index(r).

    Marks the image of r -> r^2; nonzero squares get +1, non-squares -1,
    index 0 gets 0.
    """
    d = degree(P)
    S = residue_coeff_matrix(q, d).astype(np.int32)
    acc = np.zeros((S.shape[0], 2 * d - 1), dtype=np.int32)
    for i in range(d):
        for j in range(d):
            acc[:, i + j] += S[:, i] * S[:, j]
    red = _reduce_rows(q, acc % q, P)
    idx = red @ _qpowers(q, d)
    table = np.full(q ** d, -1, dtype=np.int8)
    table[idx] = 1
    table[0] = 0
    table.setflags(write=False)
    return table


def _residue_symbols_of_rows(q: int, rows: np.ndarray, P: Poly) -> np.ndarray:
    """(r/P) for polynomial coefficient rows, via the square table."""
    red = _reduce_rows(q, rows, P)
    idx = red @ _qpowers(q, degree(P))
    return square_table(q, P)[idx]


@lru_cache(maxsize=None)
def char_table(q: int, f: Poly) -> np.ndarray:
    """int8 table of (r/f) over all residues r mod f, index sum r_i q^i."""
    n = degree(f)
    if n == 0:
        t = np.ones(1, dtype=np.int8)
        t.setflags(write=False)
        return t
    digits = residue_coeff_matrix(q, n)
    table = np.ones(q ** n, dtype=np.int8)
    for P, e in ffpoly.factorize(q, f).factors:
        s = _residue_symbols_of_rows(q, digits, P)
        if e % 2 == 1:
            table *= s
        else:
            table *= (s * s).astype(np.int8)
    table.setflags(write=False)
    return table


def char_sum_monic(q: int, f: Poly, m: int) -> int:
    """sum over monic h of degree m of (h/f), exactly (an integer)."""
    if m < 0:
        return 0
    n = degree(f)
    if n == 0:
        return q ** m
    table = char_table(q, f)
    if m < n:
        return int(table[q ** m: 2 * q ** m].sum(dtype=np.int64))
    rows = monic_coeff_matrix(q, m)
    red = _reduce_rows(q, rows, f)
    idx = red @ _qpowers(q, n)
    return int(table[idx].sum(dtype=np.int64))


# ---------------------------------------------------------------------------
# Gauss sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussSumValue:
    """A Gauss sum value, exact (coeff * q^(half_power/2)) when available."""
    q: int
    coeff: int | None = None
    half_power: int | None = None
    approx: complex | None = None

    @property
    def exact(self) -> bool:
        return self.coeff is not None

    @property
    def value(self) -> complex:
        if self.coeff is not None:
            if self.coeff == 0:
                return 0j
            return complex(self.coeff * self.q ** (self.half_power / 2))
        return self.approx


def gauss_sum_direct(q: int, V: Poly, f: Poly,
                     budget: int = DEFAULT_GAUSS_BUDGET) -> GaussSumValue:
    """G(V, chi_f) by literal enumeration of all |f| residues."""
    n = degree(f)
    if n < 1:
        raise ValueError("gauss sum needs deg(f) >= 1")
    if q ** n > budget:
        raise EnumerationBudgetError(
            f"|f| = {q}^{n} exceeds the direct-sum budget {budget}")
    chi = char_table(q, f)
    if not V:
        return GaussSumValue(q=q, approx=complex(chi.sum(dtype=np.int64)))
    digits = residue_coeff_matrix(q, n).astype(np.int64)
    # u*V for all residues u, then reduce mod f; a_1 is the x^(n-1) coefficient
    width = n + len(V) - 1
    prod_ = np.zeros((digits.shape[0], width), dtype=np.int64)
    for j, c in enumerate(V):
        if c:
            prod_[:, j:j + n] += c * digits
    red = _reduce_rows(q, prod_ % q, f)
    a1 = red[:, n - 1]
    # bin chi by a_1 value: G = sum_c bins[c] exp(2 pi i c / q)
    bins = np.bincount(a1, weights=chi.astype(np.float64), minlength=q)
    phases = np.exp(2j * np.pi * np.arange(q) / q)
    return GaussSumValue(q=q, approx=complex(bins @ phases))


def gauss_sum_closed(q: int, V: Poly, P: Poly, j: int) -> GaussSumValue:
    """G(V, chi_{P^j}) by the five-case closed form (V = 0 means alpha = inf)."""
    if j < 1:
        raise ValueError("prime-power exponent must be >= 1")
    if not is_irreducible(q, P):
        raise ValueError("closed form needs an irreducible P")
    d = degree(P)
    if V:
        alpha = 0
        V1 = V
        while True:
            quo, rem = divmod_poly(q, V1, P)
            if rem:
                break
            V1 = quo
            alpha += 1
    else:
        alpha = None  # infinite multiplicity
    if alpha is None or j <= alpha:
        if j % 2 == 1:
            return GaussSumValue(q=q, coeff=0, half_power=0)
        return GaussSumValue(q=q, coeff=q ** (j * d) - q ** ((j - 1) * d),
                             half_power=0)
    if j == alpha + 1:
        if j % 2 == 0:
            return GaussSumValue(q=q, coeff=-1, half_power=2 * (j - 1) * d)
        chi = jacobi(q, V1, P)
        return GaussSumValue(q=q, coeff=chi, half_power=(2 * j - 1) * d)
    return GaussSumValue(q=q, coeff=0, half_power=0)


def gauss_sum_closed_composite(q: int, V: Poly, f: Poly) -> GaussSumValue:
    """G(V, chi_f) via the closed form and multiplicativity over f's primes."""
    if degree(f) == 0:
        return GaussSumValue(q=q, coeff=1, half_power=0)
    coeff, half = 1, 0
    for P, e in ffpoly.factorize(q, f).factors:
        g = gauss_sum_closed(q, V, P, e)
        if g.coeff == 0:
            return GaussSumValue(q=q, coeff=0, half_power=0)
        coeff *= g.coeff
        half += g.half_power
    return GaussSumValue(q=q, coeff=coeff, half_power=half)


# ---------------------------------------------------------------------------
# exact character-sum identities
# ---------------------------------------------------------------------------

def _monic_polys(q: int, m: int) -> list[Poly]:
    return list(ffpoly.enumerate_monic(q, m))


def char_sum_via_gauss(q: int, f: Poly, m: int) -> float:
    """sum_{h in M_m} chi_f(h) through Gauss sums (closed form).

    Even deg(f) = n:
        q^m/|f| * (G(0) + q sum_{V in M_{<= n-m-2}} G(V)
                        -   sum_{V in M_{<= n-m-1}} G(V))
    Odd n:
        q^(m+1/2)/|f| * sum_{V in M_{n-m-1}} G(V)
    """
    n = degree(f)
    if n == 0:
        return float(q ** m)
    fnorm = q ** n
    if n % 2 == 0:
        total = gauss_sum_closed_composite(q, ZERO, f).value
        for dd in range(0, n - m):
            s = sum(gauss_sum_closed_composite(q, V, f).value
                    for V in _monic_polys(q, dd))
            if dd <= n - m - 2:
                total += q * s
            total -= s
        return float((q ** m / fnorm * total).real)
    if n - m - 1 < 0:
        return 0.0
    s = sum(gauss_sum_closed_composite(q, V, f).value
            for V in _monic_polys(q, n - m - 1))
    return float((q ** (m + 0.5) / fnorm * s).real)


def char_sum_lemma32(q: int, f: Poly, m: int) -> int:
    """The degree-m character sum for chi_f, computed two ways and compared.

    Returns the exact integer value; a disagreement between the direct
    enumeration and the Gauss-sum route signals an implementation bug.
    """
    direct = char_sum_monic(q, f, m)
    via_gauss = char_sum_via_gauss(q, f, m)
    scale = max(1.0, abs(direct))
    if abs(direct - via_gauss) > 1e-8 * scale:
        raise AssertionError(
            f"character-sum identity failed for f={f}, m={m}: "
            f"direct {direct} vs gauss {via_gauss}")
    return direct


def _smooth_degree_counts(q: int, f: Poly, bound: int) -> list[int]:
    """counts[m] = #{monic C : C | f^inf, deg C = m} for m <= bound."""
    degs = [degree(P) for P in ffpoly.factorize(q, f).distinct_primes()]
    counts = [0] * (bound + 1)
    counts[0] = 1
    for d in degs:
        for m in range(d, bound + 1):
            counts[m] += counts[m - d]
    return counts


def sum_over_discriminants(q: int, f: Poly, g: int) -> int:
    """sum_{D in H_{2g+1}} chi_D(f), by direct enumeration (exact)."""
    m = 2 * g + 1
    ranks = ffpoly.squarefree_ranks(q, m)
    rows = monic_coeff_matrix(q, m)[ranks]
    n = degree(f)
    if n == 0:
        return int(len(ranks))
    red = _reduce_rows(q, rows, f)
    idx = red @ _qpowers(q, n)
    return int(char_table(q, f)[idx].sum(dtype=np.int64))


def fundamental_sum_lemma31(q: int, f: Poly, g: int) -> int:
    """sum_{D in H_{2g+1}} chi_D(f) two ways: enumeration vs the
    divisor-closure identity

        sum_{C | f^inf} [ S(f, 2g+1-2 deg C) - q S(f, 2g-1-2 deg C) ],

    where S(f, m) = sum_{h in M_m} chi_f(h). Returns the exact value.
    """
    lhs = sum_over_discriminants(q, f, g)
    counts = _smooth_degree_counts(q, f, g)
    rhs = 0
    for dC, cnt in enumerate(counts):
        if cnt == 0:
            continue
        m1 = 2 * g + 1 - 2 * dC
        m2 = 2 * g - 1 - 2 * dC
        if m1 >= 0:
            rhs += cnt * char_sum_monic(q, f, m1)
        if m2 >= 0:
            rhs -= cnt * q * char_sum_monic(q, f, m2)
    if lhs != rhs:
        raise AssertionError(
            f"discriminant-sum identity failed for f={f}, g={g}: {lhs} != {rhs}")
    return lhs


def chi_values_on_squarefree(q: int, f: Poly, d: int) -> np.ndarray:
    """chi_D(f) for every D in H_d (canonical order), as an int8 vector."""
    ranks = ffpoly.squarefree_ranks(q, d)
    rows = monic_coeff_matrix(q, d)[ranks]
    n = degree(f)
    if n == 0:
        return np.ones(len(ranks), dtype=np.int8)
    red = _reduce_rows(q, rows, f)
    idx = red @ _qpowers(q, n)
    return char_table(q, f)[idx]
