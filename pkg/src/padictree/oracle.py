"""Brute-force matrix oracles that cross-check the certified spectra.

Two independent eigensolvers:

* Symmetric tridiagonal truncations (exact rational entries) go through
  Sturm-sequence bisection.  The leading-principal-minor recurrence is run in
  arbitrary-precision integers after clearing denominators, so the count of
  eigenvalues below a rational shift is itself exact and the resulting
  brackets are certified with no floating point anywhere.

* The dense tree truncation (entries carry sqrt(p)) goes through cyclic
  threshold Jacobi rotations in mpfr floating point, default 50 decimal
  digits.  Rotations preserve trace and Frobenius norm up to roundoff, which
  the report records.

Neither path knows anything about q-series or brackets; agreement with the
certified records is the decisive evidence the analytic route is right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import mpmath as mp

from .config import oracle_dps
from .operators import TruncMatrix, tree_btb_split, tree_vertex_count, truncated_matrix
from .spectrum import EigenvalueRecord, multiplicity, refine_eigenvalue
from .tree import _prime_int


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    certified: str
    oracle: str
    rel_dev: str


@dataclass(frozen=True)
class OracleReport:
    operator_id: str
    p: int
    size: int
    eigenvalues: tuple[str, ...]
    comparisons: tuple[ComparisonRow, ...]
    max_rel_dev: str
    passed: bool | None = None
    clusters: tuple[tuple[str, int], ...] | None = None


def _tridiagonal_data(matrix: TruncMatrix) -> tuple[list[Fraction], list[Fraction]]:
    if not matrix.exact:
        raise ValueError("Sturm bisection needs exact rational entries")
    dim = matrix.dim
    e = matrix.entries
    for i in range(dim):
        for j in range(dim):
            if abs(i - j) > 1 and e[i][j] != 0:
                raise ValueError("matrix is not tridiagonal")
    for i in range(dim - 1):
        if e[i][i + 1] != e[i + 1][i]:
            raise ValueError("matrix is not symmetric")
    diag = [Fraction(e[i][i]) for i in range(dim)]
    off = [Fraction(e[i][i + 1]) for i in range(dim - 1)]
    return diag, off


def _integerize(diag: list[Fraction], off: list[Fraction]) -> tuple[list[int], list[int], int]:
    scale = 1
    for x in diag + off:
        scale = scale * x.denominator // math.gcd(scale, x.denominator)
    a = [int(x * scale) for x in diag]
    b = [int(x * scale) for x in off]
    return a, b, scale


def _count_below(a: list[int], b: list[int], u: int, v: int) -> int:
    """Number of eigenvalues of the integer tridiagonal below u/v (v > 0).

    Signs of the leading principal minors of (A - (u/v) I), cleared by v^i:
    D_i = (a_i v - u) D_{i-1} - b_{i-1}^2 v^2 D_{i-2}.  A sign flip marks a
    negative pivot; exact zeros count as flips, keeping counts monotone.
    """
    count = 0
    sign_prev = 1
    d_prev, d = 1, a[0] * v - u
    vv = v * v
    for i in range(1, len(a)):
        s = 1 if d > 0 else (-1 if d < 0 else -sign_prev)
        if s != sign_prev:
            count += 1
        sign_prev = s
        d_prev, d = d, (a[i] * v - u) * d - (b[i - 1] * b[i - 1]) * vv * d_prev
    s = 1 if d > 0 else (-1 if d < 0 else -sign_prev)
    if s != sign_prev:
        count += 1
    return count


def sturm_count_below(matrix: TruncMatrix, x) -> int:
    """Exact number of eigenvalues of a rational symmetric tridiagonal matrix
    below the rational shift x."""
    diag, off = _tridiagonal_data(matrix)
    a, b, scale = _integerize(diag, off)
    x = Fraction(x) * scale
    return _count_below(a, b, x.numerator, x.denominator)


def tridiag_eigenvalues(matrix: TruncMatrix, count: int, digits: int = 13) -> list[tuple[Fraction, Fraction]]:
    """Certified brackets for the `count` smallest eigenvalues, each with
    relative width at most 10^(-digits).  Deterministic dyadic bisection from
    the Gershgorin interval; exact integer Sturm counts throughout."""
    diag, off = _tridiagonal_data(matrix)
    a, b, scale = _integerize(diag, off)
    dim = len(a)
    if not (1 <= count <= dim):
        raise ValueError("count out of range")
    spread = []
    for i in range(dim):
        radius = (abs(b[i - 1]) if i > 0 else 0) + (abs(b[i]) if i < dim - 1 else 0)
        spread.append((a[i] - radius, a[i] + radius))
    glo = min(s[0] for s in spread)
    ghi = max(s[1] for s in spread)
    pow10 = 10**digits
    out = []
    for j in range(1, count + 1):
        # lo/v and hi/v share one dyadic denominator, so each step only
        # doubles v; all width comparisons are integer cross-products.
        lo, hi, v = glo, ghi, 1
        guard = 64 * (digits + 8) + ghi.bit_length()
        while (hi - lo) * pow10 > abs(hi):
            guard -= 1
            if guard < 0:
                raise RuntimeError("bisection failed to converge")
            mid, v = lo + hi, 2 * v
            lo, hi = 2 * lo, 2 * hi
            if _count_below(a, b, mid, v) >= j:
                hi = mid
            else:
                lo = mid
        out.append((Fraction(lo, v) / scale, Fraction(hi, v) / scale))
    return out


def trace_inverse(matrix: TruncMatrix) -> Fraction:
    """Exact trace of the inverse of a rational symmetric tridiagonal matrix,
    via the two minor recurrences: (A^-1)_ii = theta_{i-1} phi_{i+1} / theta_n."""
    diag, off = _tridiagonal_data(matrix)
    a, b, scale = _integerize(diag, off)
    dim = len(a)
    theta = [1, a[0]]
    for i in range(1, dim):
        theta.append(a[i] * theta[i] - b[i - 1] ** 2 * theta[i - 1])
    phi = [0] * (dim + 2)
    phi[dim + 1] = 1
    phi[dim] = a[dim - 1]
    for i in range(dim - 2, -1, -1):
        phi[i + 1] = a[i] * phi[i + 2] - b[i] ** 2 * phi[i + 3]
    det = theta[dim]
    if det == 0:
        raise ZeroDivisionError("matrix is singular")
    total = sum(Fraction(theta[i] * phi[i + 2], det) for i in range(dim))
    return total * scale


def compare(
    certified: list[EigenvalueRecord],
    oracle_values: list[tuple[Fraction, Fraction]],
    tol: Fraction,
) -> tuple[bool, tuple[ComparisonRow, ...], Fraction]:
    """Per-index relative deviations between certified midpoints and oracle
    bracket midpoints; passes iff all are at most tol."""
    if len(certified) != len(oracle_values):
        raise ValueError("mismatched comparison lengths")
    tol = Fraction(tol)
    rows = []
    worst = Fraction(0)
    for record, (olo, ohi) in zip(certified, oracle_values):
        cert_mid = record.midpoint
        orac_mid = (olo + ohi) / 2
        dev = abs(cert_mid - orac_mid) / abs(orac_mid)
        worst = max(worst, dev)
        rows.append(
            ComparisonRow(
                label=f"n={record.index}",
                certified=_decimal(cert_mid, 20),
                oracle=_decimal(orac_mid, 20),
                rel_dev=_decimal(dev, 20),
            )
        )
    return worst <= tol, tuple(rows), worst


def truncated_d0_spectrum(p, size: int, count: int, digits: int = 12, tol=Fraction(1, 10**10)) -> OracleReport:
    """Sturm eigenvalues of the size x size Dirichlet truncation versus the
    certified series roots; requires size >= count + 10 so truncation error
    stays far below the comparison tolerance."""
    p = _prime_int(p)
    if size < count + 10:
        raise ValueError("size must be at least count + 10")
    matrix = truncated_matrix("d0star_d0", p, size)
    oracle_vals = tridiag_eigenvalues(matrix, count, digits + 2)
    certified = [refine_eigenvalue(p, n, digits) for n in range(1, count + 1)]
    passed, rows, worst = compare(certified, oracle_vals, Fraction(tol))
    return OracleReport(
        operator_id="d0star_d0",
        p=p,
        size=size,
        eigenvalues=tuple(_decimal((lo + hi) / 2, 20) for lo, hi in oracle_vals),
        comparisons=rows,
        max_rel_dev=_decimal(worst, 20),
        passed=passed,
    )


def jacobi_eigenvalues(m0, m1, p: int, digits: int | None = None) -> tuple[list, int, float]:
    """Cyclic threshold Jacobi on the symmetric matrix M0 + M1 sqrt(p).

    Entries are mpfr floats at `digits` decimal digits (default 50).  Returns
    (ascending eigenvalues as mpmath mpf, sweeps, final off-diagonal norm).
    Early sweeps rotate only entries above a shrinking threshold; the sweep
    loop stops once the off-diagonal norm falls below 10^(16-digits) of the
    matrix norm.
    """
    digits = oracle_dps(digits)
    bits = int(digits * 3.3219280948873626) + 30
    dim = len(m0)
    ctx = gmpy2.context(precision=bits)
    with ctx:
        sqrt_p = gmpy2.sqrt(gmpy2.mpfr(p))
        a = [
            [gmpy2.mpfr(m0[i][j].numerator) / m0[i][j].denominator
             + (gmpy2.mpfr(m1[i][j].numerator) / m1[i][j].denominator) * sqrt_p
             for j in range(dim)]
            for i in range(dim)
        ]
        zero = gmpy2.mpfr(0)
        one = gmpy2.mpfr(1)
        eps = gmpy2.mpfr(10) ** (-(digits - 16))
        sweeps = 0
        off = zero
        for sweep in range(48):
            sweeps = sweep + 1
            off = zero
            for i in range(dim):
                row = a[i]
                for j in range(i + 1, dim):
                    off += row[j] * row[j]
            norm_sq = sum(a[i][i] ** 2 for i in range(dim)) + 2 * off
            if off <= eps * eps * norm_sq:
                break
            threshold_sq = off / (dim * dim) if sweep < 3 else zero
            for i in range(dim):
                ai = a[i]
                for j in range(i + 1, dim):
                    aij = ai[j]
                    if aij * aij <= threshold_sq:
                        continue
                    theta = (a[j][j] - ai[i]) / (2 * aij)
                    if theta >= 0:
                        t = one / (theta + gmpy2.sqrt(theta * theta + 1))
                    else:
                        t = -one / (-theta + gmpy2.sqrt(theta * theta + 1))
                    c = one / gmpy2.sqrt(t * t + 1)
                    s = t * c
                    aj = a[j]
                    for k in range(dim):
                        aik, ajk = ai[k], aj[k]
                        ai[k] = c * aik - s * ajk
                        aj[k] = s * aik + c * ajk
                    for k in range(dim):
                        ak = a[k]
                        aki, akj = ak[i], ak[j]
                        ak[i] = c * aki - s * akj
                        ak[j] = s * aki + c * akj
        else:
            raise RuntimeError("Jacobi sweeps failed to converge")
        with mp.workdps(digits + 10):
            eigs = sorted(mp.mpf(str(a[i][i])) for i in range(dim))
            off_norm = float(gmpy2.sqrt(off))
    return eigs, sweeps, off_norm


def cluster_eigenvalues(values, rel_tol) -> list[tuple]:
    """Group an ascending eigenvalue list; a value joins the current cluster
    when it sits within rel_tol (relative) of the cluster's last member.
    Returns (center, count) pairs."""
    clusters: list[list] = []
    for x in values:
        if clusters and abs(x - clusters[-1][-1]) <= rel_tol * abs(x):
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return [(sum(c) / len(c), len(c)) for c in clusters]


def truncated_tree_spectrum(p, depth: int, digits: int | None = None, cluster_rel_tol=Fraction(1, 10**6)) -> OracleReport:
    """Dense Jacobi eigensolve of the depth-truncated tree operator in the
    weight-orthonormalized basis, clustered and labeled against the predicted
    values p^(2m) lam_n."""
    p = _prime_int(p)
    digits = oracle_dps(digits)
    dim = tree_vertex_count(p, depth)
    m0, m1 = tree_btb_split(p, depth)
    eigs, _sweeps, _off = jacobi_eigenvalues(m0, m1, p, digits)
    with mp.workdps(digits + 10):
        trace_exact = sum(m0[i][i] for i in range(dim)) + mp.sqrt(p) * sum(
            m1[i][i] for i in range(dim)
        )
        trace_dev = abs(sum(eigs) - trace_exact) / trace_exact
        if trace_dev > mp.mpf(10) ** (-(digits - 14)):
            raise RuntimeError("Jacobi trace drift beyond the roundoff budget")
        clusters = cluster_eigenvalues(eigs, mp.mpf(cluster_rel_tol.numerator) / cluster_rel_tol.denominator)
        predictions = []
        for m in range(depth + 1):
            for n in range(1, depth + 3):
                record = refine_eigenvalue(p, n, 12)
                value = Fraction(p ** (2 * m)) * record.midpoint
                predictions.append((m, n, value))
        rows = []
        worst = mp.mpf(0)
        for center, count in clusters:
            best = min(predictions, key=lambda t: abs(center - t[2]) / float(t[2]))
            dev = abs(center - mp.mpf(best[2].numerator) / best[2].denominator) / center
            worst = max(worst, dev)
            rows.append(
                ComparisonRow(
                    label=f"m={best[0]},n={best[1]},mult={multiplicity(p, best[0])},count={count}",
                    certified=mp.nstr(mp.mpf(best[2].numerator) / best[2].denominator, 20),
                    oracle=mp.nstr(center, 20),
                    rel_dev=mp.nstr(dev, 6),
                )
            )
        return OracleReport(
            operator_id="tree_dstar_d",
            p=p,
            size=dim,
            eigenvalues=tuple(mp.nstr(e, 25) for e in eigs),
            comparisons=tuple(rows),
            max_rel_dev=mp.nstr(worst, 6),
            clusters=tuple((mp.nstr(center, 25), count) for center, count in clusters),
        )


def _decimal(x: Fraction, places: int) -> str:
    """Round-to-nearest fixed-point decimal string of a rational."""
    x = Fraction(x)
    scaled = x * 10**places
    n, r = divmod(scaled.numerator, scaled.denominator)
    if 2 * r >= scaled.denominator:
        n += 1
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"
