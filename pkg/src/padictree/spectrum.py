"""Certified eigenvalues of the half-line operator and the full tree spectrum.

The eigenvalues of the half-line operator (one fiber of the tree operator)
are the positive roots of the characteristic series phi(0; q; q, lam) with
q = p^(-2).  Root n is located inside the transported bracket

    lo_n = q^(1-n) (1 - q^n/(1-q^n))^2,   hi_n = q^(1-n),

then pinned by bisection in which every rejected half carries a certified
strict sign of the series (exact partial sum dominating a rigorous tail
bound).  Eigenvectors come from the closed-form coefficient family

    f_n = sum_{k>=1} c(2k) p^(-2nk),   c(2) = 1,

whose coefficients satisfy the two-term recursion obtained by matching
powers of p^(-2n); truncating at c(2K) leaves the residual against the
tridiagonal action equal to -lam c(2K) q^(nK) on every row n >= 1, which is
why residual and norm have exact rational closed forms below.

The tree operator restricted to the fiber (r, p^(-m)) is p^(2m) times the
half-line model, so its spectrum is the union of p^(2m) lam_n with
multiplicity 1 at m = 0 (the single identity fiber) and p^m - p^(m-1) for
m >= 1 (the number of fibers with that denominator).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .config import term_budget
from .exactnum import (
    BudgetExceededError,
    ErrorBounded,
    SignEvidence,
    char_series_sign,
    qpochhammer_infinite,
)
from .operators import HalfLineSeq
from .tree import _prime_int

HALF = Fraction(1, 2)


def transported_bracket(p, n: int) -> tuple[Fraction, Fraction]:
    """Open bracket (lo, hi) certified to contain the n-th root, n >= 1."""
    p = _prime_int(p)
    if n < 1:
        raise ValueError("eigenvalue index starts at 1")
    q = Fraction(1, p * p)
    hi = Fraction(p ** (2 * (n - 1)))
    qn = q**n
    lo = hi * (1 - qn / (1 - qn)) ** 2
    return lo, hi


@dataclass(frozen=True)
class Bracket:
    lo: Fraction
    hi: Fraction
    sign_lo: SignEvidence
    sign_hi: SignEvidence
    method: str


def bracket_eigenvalue(p, n: int, max_terms: int | None = None) -> Bracket:
    """A sign-change bracket for root n: the transported bracket when its
    endpoint signs differ (they always have, desk-scale), otherwise a
    geometric grid scan for the n-th sign change."""
    p = _prime_int(p)
    q = Fraction(1, p * p)
    lo, hi = transported_bracket(p, n)
    ev_lo = char_series_sign(lo, q, max_terms)
    ev_hi = char_series_sign(hi, q, max_terms)
    if ev_lo.sign != ev_hi.sign:
        return Bracket(lo, hi, ev_lo, ev_hi, "transported")
    # Fallback: walk a geometric grid from below the first root and return
    # the n-th sign change.
    start = transported_bracket(p, 1)[0] / 2
    ceiling = Fraction(p ** (2 * n), 1) * 4
    grid_ratio = Fraction(5, 4)
    prev_x, prev_ev = start, char_series_sign(start, q, max_terms)
    changes = 0
    x = start * grid_ratio
    while x <= ceiling:
        ev = char_series_sign(x, q, max_terms)
        if ev.sign != prev_ev.sign:
            changes += 1
            if changes == n:
                return Bracket(prev_x, x, prev_ev, ev, "scan")
        prev_x, prev_ev = x, ev
        x *= grid_ratio
    raise BudgetExceededError(f"sign scan exhausted below {ceiling} without {n} changes")


@dataclass(frozen=True)
class EigenvalueRecord:
    """Certified bracket [lo, hi] for root `index`, with the sign certificates
    that pin it down.  `digits` is the achieved relative width exponent:
    hi - lo <= hi * 10^(-digits)."""

    p: int
    index: int
    lo: Fraction
    hi: Fraction
    digits: int
    sign_lo: SignEvidence
    sign_hi: SignEvidence

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("bracket must satisfy lo < hi")
        if self.sign_lo.sign == self.sign_hi.sign:
            raise ValueError("bracket endpoints must carry opposite certified signs")
        if self.hi - self.lo > self.hi * Fraction(1, 10**self.digits):
            raise ValueError("bracket wider than the claimed digits")

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def interval(self) -> ErrorBounded:
        return ErrorBounded.from_endpoints(self.lo, self.hi)


_RECORDS: dict[tuple[int, int], EigenvalueRecord] = {}


def refine_eigenvalue(p, n: int, digits: int, max_terms: int | None = None) -> EigenvalueRecord:
    """Bisect the bracket for root n until hi - lo <= hi * 10^(-digits); every
    rejected half is certified by a strict sign of the characteristic series.

    Records are cached per (p, n) and only ever tightened, so repeated calls
    are cheap; cached results at least as tight as requested are returned
    as-is.
    """
    p = _prime_int(p)
    if digits < 1:
        raise ValueError("digits must be >= 1")
    q = Fraction(1, p * p)
    cached = _RECORDS.get((p, n))
    if cached is not None and cached.digits >= digits:
        return cached
    if cached is not None:
        lo, hi = cached.lo, cached.hi
        ev_lo, ev_hi = cached.sign_lo, cached.sign_hi
    else:
        bracket = bracket_eigenvalue(p, n, max_terms)
        lo, hi, ev_lo, ev_hi = bracket.lo, bracket.hi, bracket.sign_lo, bracket.sign_hi
    width_target = Fraction(1, 10**digits)
    while hi - lo > hi * width_target:
        mid = (lo + hi) / 2
        ev_mid = char_series_sign(mid, q, max_terms)
        if ev_mid.sign == ev_lo.sign:
            lo, ev_lo = mid, ev_mid
        else:
            hi, ev_hi = mid, ev_mid
    achieved = digits
    while hi - lo <= hi * Fraction(1, 10 ** (achieved + 1)):
        achieved += 1
    record = EigenvalueRecord(p, n, lo, hi, achieved, ev_lo, ev_hi)
    _RECORDS[(p, n)] = record
    return record


def eigenvalue_record(p, n: int, digits: int) -> EigenvalueRecord:
    """Cached accessor used by the zeta and spectrum layers."""
    return refine_eigenvalue(p, n, digits)


@dataclass(frozen=True)
class EigenvectorExpansion:
    """Coefficients c(2), c(4), ..., c(2K) of the eigenvector expansion for an
    approximate eigenvalue `lam`, plus a rigorous bound on everything the
    truncation at K omits from sum_n |f_n|."""

    p: int
    lam: Fraction
    coefficients: tuple[Fraction, ...]
    tail_bound: Fraction

    @property
    def terms(self) -> int:
        return len(self.coefficients)


def eigenvector_coefficients(lam, p, terms: int) -> EigenvectorExpansion:
    """c(2) = 1 and, for k >= 2,

        c(2k) = (-lam/(1-p^-2))^(k-1) * p^(k(k-1)) (p^2-1)^(k-2)
                / ((p^4-1)^2 (p^6-1)^2 ... (p^(2k-2)-1)^2 (p^(2k)-1)),

    with the squared chain empty at k = 2.  Exact rationals throughout.
    """
    p = _prime_int(p)
    lam = Fraction(lam)
    if terms < 1:
        raise ValueError("terms must be >= 1")
    coeffs = [Fraction(1)]
    base = -lam / (1 - Fraction(1, p * p))
    for k in range(2, terms + 1):
        chain = Fraction(1)
        for j in range(2, k):
            chain *= Fraction(p ** (2 * j) - 1) ** 2
        value = (
            base ** (k - 1)
            * Fraction(p ** (k * (k - 1)))
            * Fraction((p * p - 1) ** (k - 2))
            / (chain * (p ** (2 * k) - 1))
        )
        coeffs.append(value)
    tail = _coefficient_tail_sum(lam, p, coeffs)
    q = Fraction(1, p * p)
    tail_bound = tail / (1 - q ** (terms + 1))
    return EigenvectorExpansion(p, lam, tuple(coeffs), tail_bound)


def _recursion_denominator(p: int, k: int) -> Fraction:
    # c(2k) = lam * c(2k-2) / den_k from matching powers of p^(-2n)
    q = Fraction(1, p * p)
    return q * (1 + p * p) - p * p * q ** (k + 1) - q ** (k - 1)


def _coefficient_ratio_bound(lam: Fraction, p: int, k: int) -> Fraction:
    # |c(2k)/c(2k-2)| <= |lam| / (q^(1-k) - q(1+p^2) - p^2 q^(k+1)), valid and
    # decreasing for k >= 2 (the positive part q^(1-k) dominates).
    q = Fraction(1, p * p)
    floor = q ** (1 - k) - q * (1 + p * p) - p * p * q ** (k + 1)
    if floor <= 0:
        raise ValueError("ratio bound needs k >= 2")
    return abs(lam) / floor


def _coefficient_tail_sum(lam: Fraction, p: int, coeffs: list[Fraction]) -> Fraction:
    """Rigorous bound on sum_{k > K} |c(2k)| for the computed list."""
    k = len(coeffs)
    last = abs(coeffs[-1])
    total = Fraction(0)
    budget = term_budget(None)
    for _ in range(budget):
        ratio = _coefficient_ratio_bound(lam, p, k + 1)
        if ratio <= HALF:
            return total + 2 * last * ratio
        last *= ratio
        total += last
        k += 1
    raise BudgetExceededError("coefficient tail did not enter geometric decay")


def synthesize_eigenvector(expansion: EigenvectorExpansion, samples: int) -> HalfLineSeq:
    """f_n = sum_k c(2k) p^(-2nk) for n = 0..samples, exactly."""
    q = Fraction(1, expansion.p ** 2)
    values = []
    for n in range(samples + 1):
        qn = q**n
        power = Fraction(1)
        acc = Fraction(0)
        for c in expansion.coefficients:
            power *= qn
            acc += c * power
        values.append(acc)
    return HalfLineSeq(tuple(values))


def residual_norm_sq(expansion: EigenvectorExpansion) -> tuple[Fraction, Fraction, Fraction]:
    """Exact (residual^2, norm^2, row0) of the infinite synthesized vector.

    Row 0 of (A - lam) f is f_0 - f_1 - lam f_0; every row n >= 1 equals
    -lam c(2K) q^(nK) because the coefficient recursion matches all lower
    powers exactly.  Hence

        residual^2 = row0^2 + lam^2 c(2K)^2 q^(2K) / (1 - q^(2K)),
        norm^2     = sum_{k,k'} c(2k) c(2k') / (1 - q^(k+k')).
    """
    p = expansion.p
    q = Fraction(1, p * p)
    coeffs = expansion.coefficients
    big_k = len(coeffs)
    f0 = sum(coeffs, Fraction(0))
    f1 = sum(c * q**k for k, c in enumerate(coeffs, start=1))
    row0 = f0 - f1 - expansion.lam * f0
    c_last = coeffs[-1]
    res_sq = row0**2 + expansion.lam**2 * c_last**2 * q ** (2 * big_k) / (1 - q ** (2 * big_k))
    norm_sq = Fraction(0)
    for k, ck in enumerate(coeffs, start=1):
        for kp, ckp in enumerate(coeffs, start=1):
            norm_sq += ck * ckp / (1 - q ** (k + kp))
    return res_sq, norm_sq, row0


def check_c2_identity(expansion: EigenvectorExpansion) -> ErrorBounded:
    """Interval for c(2) - (lam/(1-p^-2)) sum_n f_n, with the coefficient tail
    of the sum accounted rigorously; near a root this must be tiny."""
    p = expansion.p
    q = Fraction(1, p * p)
    partial = Fraction(0)
    for k, c in enumerate(expansion.coefficients, start=1):
        partial += c / (1 - q**k)
    tail = _coefficient_tail_sum(expansion.lam, p, list(expansion.coefficients))
    tail /= 1 - q ** (expansion.terms + 1)
    vector_sum = ErrorBounded(partial, tail)
    factor = expansion.lam / (1 - q)
    return ErrorBounded.exact(1) - vector_sum * factor


_POCH_CACHE: dict[int, Fraction] = {}


def _euler_product_lower(p: int) -> Fraction:
    """Certified lower bound on prod_{k>=1} (1 - p^(-2k))."""
    if p not in _POCH_CACHE:
        q = Fraction(1, p * p)
        interval = qpochhammer_infinite(q, q, Fraction(1, 10**30))
        _POCH_CACHE[p] = interval.lo
    return _POCH_CACHE[p]


def remainder_bound(lam, p, n_terms: int) -> Fraction:
    """Upper bound |lam|^N / (p^(N(N+1)) prod_{k>=1}(1-p^(-2k))^2) on the
    l1 norm of the expansion remainder after N coefficient orders (per unit
    l1 norm of the eigenvector; the certified lower endpoint of the infinite
    product keeps the bound valid)."""
    p = _prime_int(p)
    lam = Fraction(lam)
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    euler = _euler_product_lower(p)
    return abs(lam) ** n_terms / (Fraction(p ** (n_terms * (n_terms + 1))) * euler**2)


def empirical_remainder(expansion: EigenvectorExpansion, n_terms: int, rows: int = 40) -> Fraction:
    """Upper bound on sum_{n>=0} |f_n - sum_{k<=N} c(2k) p^(-2nk)| measured
    against the high-K reference expansion.

    Rows 0..rows are summed exactly; rows beyond contribute at most a
    geometric tail, and the reference's own truncation enters through its
    tail bound.
    """
    p = expansion.p
    q = Fraction(1, p * p)
    if not (1 <= n_terms < expansion.terms):
        raise ValueError("need 1 <= n_terms < expansion.terms")
    omitted = expansion.coefficients[n_terms:]
    total = Fraction(0)
    for n in range(rows + 1):
        qn = q**n
        power = qn**n_terms
        acc = Fraction(0)
        for c in omitted:
            power *= qn
            acc += c * power
        total += abs(acc)
    abs_sum = sum(abs(c) for c in omitted)
    row_tail = abs_sum * q ** ((rows + 1) * (n_terms + 1)) / (1 - q ** (n_terms + 1))
    return total + row_tail + expansion.tail_bound


def char_equation_neve(lam, p, eps, max_terms: int | None = None) -> ErrorBounded:
    """Certified value of the reduced characteristic equation in its raw form

        sum_{k>=1} c(2k) (q^k + lam - 1),   q = p^(-2), c(2) = 1,

    which equals (q - 1) times the characteristic series; evaluated with the
    same exact-partial-sum-plus-tail discipline for cross-validation.
    """
    p = _prime_int(p)
    lam = Fraction(lam)
    eps = Fraction(eps)
    q = Fraction(1, p * p)
    budget = term_budget(max_terms)
    c = Fraction(1)
    total = c * (q + lam - 1)
    for k in range(2, budget + 1):
        c = lam * c / _recursion_denominator(p, k)
        total += c * (q**k + lam - 1)
        ratio = _coefficient_ratio_bound(lam, p, k + 1)
        if ratio <= HALF:
            tail = (abs(lam - 1) + q ** (k + 1)) * 2 * abs(c) * ratio
            if tail <= eps:
                return ErrorBounded(total, tail)
    raise BudgetExceededError(f"reduced characteristic series tail below {eps} not reached")


def multiplicity(p, m: int) -> int:
    """Number of fibers with denominator exponent m: 1 at m = 0, else
    p^m - p^(m-1) (the units count mod p^m)."""
    p = _prime_int(p)
    if m < 0:
        raise ValueError("m must be >= 0")
    return 1 if m == 0 else p**m - p ** (m - 1)


@dataclass(frozen=True)
class SpectrumEntry:
    """One tree eigenvalue p^(2m) lam_n with its provenance and multiplicity."""

    m: int
    n: int
    value: ErrorBounded
    multiplicity: int

    def __post_init__(self):
        if self.m < 0 or self.n < 1 or self.multiplicity < 1:
            raise ValueError("invalid spectrum entry")


def dstar_d_spectrum(p, cutoff, digits: int = 12) -> tuple[SpectrumEntry, ...]:
    """All certified tree eigenvalues p^(2m) lam_n with value at most `cutoff`
    (decided by the certified upper endpoints), ascending, never merged."""
    p = _prime_int(p)
    cutoff = Fraction(cutoff)
    if cutoff <= 0:
        raise ValueError("cutoff must be > 0")
    entries = []
    m = 0
    while True:
        scale = Fraction(p ** (2 * m))
        if scale * transported_bracket(p, 1)[0] > cutoff:
            break
        n = 1
        while scale * transported_bracket(p, n)[0] <= cutoff:
            record = eigenvalue_record(p, n, digits)
            if scale * record.hi <= cutoff:
                entries.append(
                    SpectrumEntry(
                        m,
                        n,
                        ErrorBounded.from_endpoints(scale * record.lo, scale * record.hi),
                        multiplicity(p, m),
                    )
                )
            n += 1
        m += 1
    entries.sort(key=lambda e: (e.value.center, e.m, e.n))
    return tuple(entries)
