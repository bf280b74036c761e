"""L-polynomials of quadratic characters: exact coefficients, zeros, identities.

For D monic square-free of degree 2g+1, the L-function of chi_D is the
degree-2g integer polynomial

    L(u, chi_D) = sum_n c_n u^n,    c_n = sum_{f in M_n} chi_D(f),

with c_0 = 1, the functional-equation identity c_{2g-n} = q^{g-n} c_n
(an exact integer identity for 0 <= n <= g), and all zeros on the circle
|u| = q^{-1/2}. The central value is L(1/2) := L(q^{-1/2}, chi_D), which
equals prod_j |2 sin(theta_j/2)|^2 over the zero angles and is therefore
nonnegative.

Coefficients are computed two ways:
  * per-D through the character table of D (c_n is a contiguous slice sum,
    since monic f of degree n < deg D are their own residues), and
  * in bulk through the Euler product: the coefficient vector of
    prod_{deg P <= 2g} (1 - chi_D(P) u^{deg P})^{-1} truncated at u^{2g},
    vectorized across the whole family H_{2g+1} with per-prime
    square tables.
The two routes, plus a literal sum over M_n, are cross-checked in tests.

Zeros are found by Aberth-Ehrlich simultaneous iteration started on the
circle |u| = q^{-1/2} (where the Riemann Hypothesis puts them), with a
companion-matrix eigenvalue fallback for rows that fail to converge.

The approximate functional equation for L(1/2)^k,

    L(1/2)^k = sum_{f in M_{<= kg}} tau_k(f) chi_D(f)/|f|^(1/2)
             + sum_{f in M_{<= kg-1}} tau_k(f) chi_D(f)/|f|^(1/2),

follows from the functional equation of L^k; the degree-<= reading is the
one that closes (the exact-degree reading fails already at k=1, g=1), and
afe_check reports the residuals of both readings.

The only persistent artifact is the coefficient cache per (q, g): a CSV
table, one row per D in canonical enumeration order, with a header
recording q, g and the format version and a trailing sha256 checksum.
"""

from __future__ import annotations

import hashlib
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import characters, ffpoly
from .characters import _qpowers, _reduce_rows, char_table, square_table
from .ffpoly import Poly, degree, is_monic, monic_coeff_matrix

CACHE_VERSION = 1


class CacheCorruptError(RuntimeError):
    """Coefficient cache failed its checksum or shape validation."""


@dataclass(frozen=True)
class LPoly:
    """The L-polynomial of chi_D as exact integer coefficients c_0..c_{2g}."""
    q: int
    D: Poly
    coeffs: tuple[int, ...]

    @property
    def g(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def eval(self, u: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc

    def eval_deriv(self, u: complex) -> complex:
        acc = 0j
        for n in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * u + n * self.coeffs[n]
        return acc

    def central_value(self) -> float:
        u = self.q ** -0.5
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc

    def functional_equation_defect(self) -> int:
        """max_n |c_{2g-n} - q^{g-n} c_n| over 0 <= n <= g (0 iff the identity holds)."""
        g = self.g
        return max(abs(self.coeffs[2 * g - n] - self.q ** (g - n) * self.coeffs[n])
                   for n in range(g + 1))


@dataclass(frozen=True)
class ZeroSet:
    """Zero angles of an L-polynomial: u_j = q^{-1/2} e^{+-i theta_j}.

    angles holds g representatives in [0, pi] (ascending, with
    multiplicity; conjugate pairing is implicit). central is set when an
    angle sits below 1e-8, i.e. a zero at the central point.
    """
    angles: tuple[float, ...]
    radius_residual: float
    eval_residual: float

    @property
    def central(self) -> bool:
        return bool(self.angles) and self.angles[0] < 1e-8


def compute_coeffs(q: int, D: Poly) -> LPoly:
    """Exact c_n = sum_{f in M_n} chi_D(f) for n = 0..2g, via D's character table.

    Monic f with deg f = n < deg D are their own residues mod D and occupy
    the contiguous index block [q^n, 2 q^n).
    """
    _validate_discriminant(q, D)
    m = degree(D)
    table = char_table(q, D)
    coeffs = tuple(int(table[q ** n: 2 * q ** n].sum(dtype=np.int64))
                   for n in range(m))
    return LPoly(q=q, D=D, coeffs=coeffs)


def compute_coeffs_direct(q: int, D: Poly) -> LPoly:
    """Definitional oracle: literal sum of jacobi(D, f) over f in M_n (slow)."""
    _validate_discriminant(q, D)
    m = degree(D)
    coeffs = tuple(sum(characters.jacobi(q, D, f)
                       for f in ffpoly.enumerate_monic(q, n))
                   for n in range(m))
    return LPoly(q=q, D=D, coeffs=coeffs)


def _validate_discriminant(q: int, D: Poly) -> None:
    if not is_monic(D) or degree(D) % 2 == 0 or degree(D) < 3:
        raise ValueError("discriminant must be monic of odd degree >= 3")
    if not ffpoly.is_squarefree(q, D):
        raise ValueError("discriminant must be square-free")


# ---------------------------------------------------------------------------
# bulk coefficients over the whole family H_{2g+1}
# ---------------------------------------------------------------------------

def _prime_list(q: int, max_deg: int) -> list[Poly]:
    out: list[Poly] = []
    for d in range(1, max_deg + 1):
        out.extend(ffpoly.irreducibles(q, d))
    return out

def _chi_at_prime(q: int, Dmat: np.ndarray, P: Poly) -> np.ndarray:
    """chi_D(P) = (D/P) for every row D of Dmat, via P's square table."""
    red = _reduce_rows(q, Dmat, P)
    idx = red @ _qpowers(q, degree(P))
    return square_table(q, P)[idx]


def _series_for_primes(q: int, two_g: int, Dmat: np.ndarray,
                       primes: list[Poly]) -> np.ndarray:
    """Coefficient rows of prod_P (1 - chi_D(P) u^{deg P})^{-1} mod u^{two_g+1}."""
    n_rows = Dmat.shape[0]
    C = np.zeros((n_rows, two_g + 1), dtype=np.int64)
    C[:, 0] = 1
    for P in primes:
        lam = _chi_at_prime(q, Dmat, P).astype(np.int64)
        d = degree(P)
        for n in range(d, two_g + 1):
            # in-place ascending n implements the geometric-series factor
            C[:, n] += lam * C[:, n - d]
    return C


def _series_chunk_worker(args) -> np.ndarray:
    q, two_g, Dbytes, shape, primes = args
    Dmat = np.frombuffer(Dbytes, dtype=np.int8).reshape(shape)
    return _series_for_primes(q, two_g, Dmat, primes)


def _convolve_truncated(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    width = A.shape[1]
    out = np.zeros_like(A)
    for i in range(width):
        for j in range(width - i):
            out[:, i + j] += A[:, i] * B[:, j]
    return out


def ensemble_coeffs(q: int, g: int, workers: int = 1,
                    cache_dir: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient matrix for every D in H_{2g+1}, canonical order.

    Returns (ranks, C): canonical ranks of the discriminants inside
    M_{2g+1}, and the (len(ranks), 2g+1) int64 matrix of c_0..c_{2g}.
    Results are exact integers, so the output is identical for any worker
    count. Uses/refreshes the per-(q, g) CSV cache when cache_dir is given.
    """
    ffpoly.check_q(q)
    if cache_dir is not None:
        path = cache_path(cache_dir, q, g)
        if os.path.exists(path):
            try:
                return load_coeff_cache(path, q, g)
            except CacheCorruptError as exc:
                warnings.warn(f"coefficient cache {path} corrupt ({exc}); recomputing")
    m = 2 * g + 1
    ranks = ffpoly.squarefree_ranks(q, m)
    Dmat = monic_coeff_matrix(q, m)[ranks]
    primes = _prime_list(q, 2 * g)
    if workers <= 1 or len(primes) < 2 * workers:
        C = _series_for_primes(q, 2 * g, Dmat, primes)
    else:
        chunks = np.array_split(np.arange(len(primes)), workers)
        jobs = [(q, 2 * g, Dmat.tobytes(), Dmat.shape,
                 [primes[i] for i in idx]) for idx in chunks if len(idx)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_series_chunk_worker, jobs))
        C = parts[0]
        for part in parts[1:]:
            C = _convolve_truncated(C, part)
    if cache_dir is not None:
        save_coeff_cache(cache_path(cache_dir, q, g), q, g, ranks, C)
    return ranks, C


# ---------------------------------------------------------------------------
# coefficient cache (CSV with checksum)
# ---------------------------------------------------------------------------

def cache_path(cache_dir: str, q: int, g: int) -> str:
    return os.path.join(cache_dir, f"lcoeffs_q{q}_g{g}_v{CACHE_VERSION}.csv")


def save_coeff_cache(path: str, q: int, g: int,
                     ranks: np.ndarray, C: np.ndarray) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    lines = [f"# ffquad-lcoeffs version={CACHE_VERSION} q={q} g={g} count={len(ranks)}"]
    header = "rank," + ",".join(f"c{i}" for i in range(C.shape[1]))
    lines.append(header)
    for r, row in zip(ranks.tolist(), C.tolist()):
        lines.append(str(r) + "," + ",".join(str(v) for v in row))
    payload = ("\n".join(lines[1:]) + "\n").encode()
    digest = hashlib.sha256(payload).hexdigest()
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(lines[0] + "\n")
        fh.write(payload.decode())
        fh.write(f"# sha256={digest}\n")
    os.replace(tmp, path)


def load_coeff_cache(path: str, q: int, g: int) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or not raw[0].startswith("# ffquad-lcoeffs"):
        raise CacheCorruptError("missing header")
    head = dict(kv.split("=") for kv in raw[0].split()[2:])
    if int(head["version"]) != CACHE_VERSION or int(head["q"]) != q or int(head["g"]) != g:
        raise CacheCorruptError(f"header mismatch: {raw[0]!r}")
    if not raw[-1].startswith("# sha256="):
        raise CacheCorruptError("missing checksum line")
    payload = ("\n".join(raw[1:-1]) + "\n").encode()
    if hashlib.sha256(payload).hexdigest() != raw[-1].split("=", 1)[1]:
        raise CacheCorruptError("checksum mismatch")
    data = np.loadtxt(raw[2:-1], delimiter=",", dtype=np.int64, ndmin=2)
    if data.shape != (int(head["count"]), 2 * g + 2):
        raise CacheCorruptError(f"unexpected shape {data.shape}")
    ranks, C = data[:, 0], data[:, 1:]
    expected = ffpoly.squarefree_ranks(q, 2 * g + 1)
    if len(ranks) != len(expected) or not np.array_equal(ranks, expected):
        raise CacheCorruptError("rank column disagrees with canonical enumeration")
    return ranks, C


# ---------------------------------------------------------------------------
# zeros
# ---------------------------------------------------------------------------

def _horner_batch(C: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """p(z) and p'(z) for coefficient rows C (ascending) at points z (N, deg)."""
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for n in range(C.shape[1] - 1, -1, -1):
        dp = dp * z + p
        p = p * z + C[:, n][:, None]
    return p, dp


def zeros_batch(q: int, C: np.ndarray, max_iter: int = 60,
                tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Aberth-Ehrlich roots of each coefficient row; returns (roots, converged)."""
    N, width = C.shape
    deg2g = width - 1
    r0 = q ** -0.5
    Cf = C.astype(np.float64)
    ang = 2 * np.pi * (np.arange(deg2g) + 0.3617) / deg2g
    z = np.broadcast_to(r0 * np.exp(1j * ang), (N, deg2g)).copy()
    converged = np.zeros(N, dtype=bool)
    for _ in range(max_iter):
        act = ~converged
        if not act.any():
            break
        za = z[act]
        p, dp = _horner_batch(Cf[act], za)
        dp = np.where(dp == 0, 1e-300, dp)
        w = p / dp
        diff = za[:, :, None] - za[:, None, :]
        np.einsum("ijj->ij", diff)[:] = 1.0
        S = (1.0 / diff).sum(axis=2) - 1.0
        denom = 1.0 - w * S
        denom = np.where(denom == 0, 1e-300, denom)
        delta = w / denom
        za = za - delta
        z[act] = za
        done = np.abs(delta).max(axis=1) < tol * r0
        idx = np.flatnonzero(act)
        converged[idx[done]] = True
    if not converged.all():
        bad = np.flatnonzero(~converged)
        z[bad] = _eig_roots(Cf[bad])
        converged[bad] = True
    return z, converged


def _eig_roots(Cf: np.ndarray) -> np.ndarray:
    """Companion-matrix fallback for rows where Aberth did not converge."""
    N, width = Cf.shape
    deg2g = width - 1
    comp = np.zeros((N, deg2g, deg2g), dtype=np.complex128)
    comp[:, 1:, :-1] = np.eye(deg2g - 1)
    comp[:, :, -1] = -Cf[:, :-1] / Cf[:, -1:]
    return np.linalg.eigvals(comp)


def zeroset_from_roots(q: int, coeffs, roots: np.ndarray) -> ZeroSet:
    """Collapse the 2g roots to g angle representatives plus residuals."""
    r0 = q ** -0.5
    radius_resid = float(np.abs(np.abs(roots) * q ** 0.5 - 1.0).max())
    cs = np.asarray(coeffs, dtype=np.float64)
    vals = np.zeros_like(roots)
    for n in range(len(cs) - 1, -1, -1):
        vals = vals * roots + cs[n]
    scale = max(abs(float(c)) * r0 ** n for n, c in enumerate(coeffs))
    eval_resid = float(np.abs(vals).max() / max(scale, 1e-300))
    thetas = np.sort(np.abs(np.angle(roots)))
    reps = tuple(float(t) for t in thetas[::2])
    return ZeroSet(angles=reps, radius_residual=radius_resid,
                   eval_residual=eval_resid)


def zeros(L: LPoly, max_iter: int = 60) -> ZeroSet:
    """Zeros of a single L-polynomial (angles in [0, pi] with multiplicity)."""
    if L.g < 1:
        raise ValueError("zeros need genus >= 1")
    C = np.asarray([L.coeffs], dtype=np.int64)
    roots, conv = zeros_batch(L.q, C, max_iter=max_iter)
    if not conv[0]:
        raise RuntimeError("root finder failed to converge")
    return zeroset_from_roots(L.q, L.coeffs, roots[0])


# ---------------------------------------------------------------------------
# approximate functional equation and the logarithmic derivative
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AfeCheck:
    """Residuals of L(1/2)^k against the two readings of the AFE sums."""
    value: float               # L(1/2)^k
    residual: float            # degree-<= reading (the one that closes)
    residual_exact_degree: float


def power_coeffs(L: LPoly, k: int) -> np.ndarray:
    """Integer coefficients of L(u)^k: b_n = sum_{f in M_n} tau_k(f) chi_D(f)."""
    b = np.array([1], dtype=np.int64)
    c = np.asarray(L.coeffs, dtype=np.int64)
    for _ in range(k):
        b = np.convolve(b, c)
    return b


def afe_check(L: LPoly, k: int) -> AfeCheck:
    if not 1 <= k <= 4:
        raise ValueError("afe_check supports k in 1..4")
    q, g = L.q, L.g
    b = power_coeffs(L, k)
    w = q ** (-0.5 * np.arange(len(b)))
    lhs = L.central_value() ** k
    rhs_le = float((b[: k * g + 1] * w[: k * g + 1]).sum()
                   + (b[: k * g] * w[: k * g]).sum())
    rhs_eq = float(b[k * g] * w[k * g] + b[k * g - 1] * w[k * g - 1])
    return AfeCheck(value=lhs, residual=abs(lhs - rhs_le),
                    residual_exact_degree=abs(lhs - rhs_eq))


def log_derivative(L: LPoly, s: complex, zero_angles=None) -> complex:
    """-L'/L at s through the u-polynomial: log q * u * Lpoly'(u)/Lpoly(u).

    Refuses evaluation when q^{-s} is within 1e-6 of a zero.
    """
    if L.g < 1:
        raise ValueError("log derivative needs genus >= 1")
    q = L.q
    u = np.exp(-s * np.log(q))
    if zero_angles is None:
        zero_angles = zeros(L).angles
    r0 = q ** -0.5
    for th in zero_angles:
        for root in (r0 * np.exp(1j * th), r0 * np.exp(-1j * th)):
            if abs(u - root) <= 1e-6:
                raise ValueError(f"s too close to a zero (|u - root| = {abs(u - root):.2e})")
    return complex(np.log(q) * u * L.eval_deriv(u) / L.eval(u))


def log_deriv_dirichlet(q: int, D: Poly, s: complex, trunc: int = 9) -> complex:
    """Oracle for -L'/L(s) in the absolute-convergence region Re(s) > 1:

        sum_{deg f <= trunc} log(q) Lambda(f) chi_D(f) |f|^{-s},

    summed over prime powers via chi_D(P) = (P/D) table lookups.
    """
    table = char_table(q, D)
    m = degree(D)
    total = 0j
    for d in range(1, trunc + 1):
        mask = ffpoly.irreducible_mask(q, d)
        rows = monic_coeff_matrix(q, d)[mask]
        red = _reduce_rows(q, rows, D) if d >= m else rows.astype(np.int64)
        if d < m:
            idx = red @ _qpowers(q, m)[: d + 1]
        else:
            idx = red @ _qpowers(q, m)
        lam = table[idx].astype(np.float64)
        j = 1
        lam_j = lam.copy()
        while j * d <= trunc:
            total += np.log(q) * d * lam_j.sum() * np.exp(-s * j * d * np.log(q))
            lam_j *= lam
            j += 1
    return complex(total)
