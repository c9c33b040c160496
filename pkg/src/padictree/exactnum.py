"""Exact rational arithmetic and certified evaluation of basic q-series.

Everything decidable is computed in `fractions.Fraction` with no rounding;
only the tails of infinite series/products are replaced by analytic bounds,
and those bounds are themselves exact rationals.  A value together with its
tail bound travels as an :class:`ErrorBounded` interval, so every consumer
can see exactly how much slack a result carries.

The q-series implemented here is the confluent basic hypergeometric series

    phi(a; b; q, z) = sum_n  (a;q)_n / ((q;q)_n (b;q)_n) (-1)^n q^(n(n-1)/2) z^n

for 0 < q < 1, which converges for every z.  Its special case
phi(0; q; q, lam) is the characteristic series whose positive roots are the
eigenvalues of the half-line operator; `char_series_sign` produces certified
signs of that series for the bisection in :mod:`padictree.spectrum`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .config import term_budget

Rational = Fraction

HALF = Fraction(1, 2)


class BudgetExceededError(RuntimeError):
    """A certified evaluation could not reach its target within the term budget."""


class UndecidedSignError(BudgetExceededError):
    """Sign undecided at budget: the partial sum never dominated its tail bound.

    For the characteristic series this signals an argument suspiciously close
    to a root.
    """


def _as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational (Fraction or int), got {type(x).__name__}")


@dataclass(frozen=True)
class ErrorBounded:
    """An exact interval [center - radius, center + radius] certified to
    contain the true value.  Endpoint arithmetic is exact rational, so
    composing intervals never loses the guarantee."""

    center: Fraction
    radius: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "center", _as_rational(self.center))
        object.__setattr__(self, "radius", _as_rational(self.radius))
        if self.radius < 0:
            raise ValueError("radius must be >= 0")

    @staticmethod
    def exact(value) -> "ErrorBounded":
        return ErrorBounded(_as_rational(value), Fraction(0))

    @staticmethod
    def from_endpoints(lo, hi) -> "ErrorBounded":
        lo = _as_rational(lo)
        hi = _as_rational(hi)
        if hi < lo:
            raise ValueError("from_endpoints requires lo <= hi")
        return ErrorBounded((lo + hi) / 2, (hi - lo) / 2)

    @property
    def lo(self) -> Fraction:
        return self.center - self.radius

    @property
    def hi(self) -> Fraction:
        return self.center + self.radius

    def contains(self, x) -> bool:
        x = _as_rational(x)
        return self.lo <= x <= self.hi

    def abs_hi(self) -> Fraction:
        """Upper bound on |value|."""
        return max(abs(self.lo), abs(self.hi))

    def __neg__(self) -> "ErrorBounded":
        return ErrorBounded(-self.center, self.radius)

    def __add__(self, other) -> "ErrorBounded":
        if isinstance(other, ErrorBounded):
            return ErrorBounded(self.center + other.center, self.radius + other.radius)
        return ErrorBounded(self.center + _as_rational(other), self.radius)

    __radd__ = __add__

    def __sub__(self, other) -> "ErrorBounded":
        return self + (-other if isinstance(other, ErrorBounded) else -_as_rational(other))

    def __rsub__(self, other) -> "ErrorBounded":
        return (-self) + other

    def __mul__(self, other) -> "ErrorBounded":
        if not isinstance(other, ErrorBounded):
            c = _as_rational(other)
            return ErrorBounded(self.center * c, self.radius * abs(c))
        products = [self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi]
        return ErrorBounded.from_endpoints(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "ErrorBounded":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return ErrorBounded.from_endpoints(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other) -> "ErrorBounded":
        if isinstance(other, ErrorBounded):
            return self * other.reciprocal()
        return self * (1 / _as_rational(other))


def qpochhammer_finite(a, q, n: int) -> Fraction:
    """(a;q)_n = prod_{j=0}^{n-1} (1 - a q^j), exactly; the empty product is 1."""
    a = _as_rational(a)
    q = _as_rational(q)
    if n < 0:
        raise ValueError("n must be >= 0")
    result = Fraction(1)
    qj = Fraction(1)
    for _ in range(n):
        result *= 1 - a * qj
        qj *= q
    return result


def qpochhammer_infinite(a, q, eps, max_terms: int | None = None) -> ErrorBounded:
    """Certified (a;q)_inf = prod_{j>=0} (1 - a q^j) for 0 < q < 1.

    The exact partial product over j < J is kept; the remaining factor R
    satisfies |log R| <= L with L = sum_{j>=J} |a| q^j / (1 - |a| q^j), so
    |R - 1| <= e^L - 1 <= L/(1-L) once L < 1.  Both L and the final radius
    are exact rationals.
    """
    a = _as_rational(a)
    q = _as_rational(q)
    eps = _as_rational(eps)
    if not (0 < q < 1):
        raise ValueError("q must satisfy 0 < q < 1")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if a == 0:
        return ErrorBounded.exact(1)
    budget = term_budget(max_terms)
    partial = Fraction(1)
    qj = Fraction(1)  # q^j for the factor about to be folded in
    for j in range(budget):
        t = abs(a) * qj
        if t < 1:
            # L bounds sum_{m>=j} |a| q^m / (1 - |a| q^m) by the geometric sum
            big_l = t / ((1 - q) * (1 - t))
            if big_l < 1:
                radius = abs(partial) * big_l / (1 - big_l)
                if radius <= eps:
                    return ErrorBounded(partial, radius)
        partial *= 1 - a * qj
        qj *= q
    raise BudgetExceededError(
        f"(a;q)_inf tail below {eps} not reached within {budget} factors"
    )


@dataclass(frozen=True)
class Phi11Params:
    """Parameters (a; b; q, z) of the confluent series, q strictly inside (0,1)
    and b never of the forbidden form q^(-n)."""

    a: Fraction
    b: Fraction
    q: Fraction
    z: Fraction

    def __post_init__(self):
        for name in ("a", "b", "q", "z"):
            object.__setattr__(self, name, _as_rational(getattr(self, name)))
        if not (0 < self.q < 1):
            raise ValueError("q must satisfy 0 < q < 1")
        if self.b > 0:
            power = Fraction(1)
            while power <= self.b:
                if power == self.b:
                    raise ValueError("b must differ from q^(-n) for every n >= 0")
                power /= self.q


def phi11_certified(params: Phi11Params, eps, max_terms: int | None = None) -> ErrorBounded:
    """Certified value of phi(a; b; q, z) with radius <= eps.

    Partial sums are exact rationals.  The tail is controlled by the uniform
    term-ratio bound

        rho(n) = |z| q^n (1 + |a| q^n) / ((1 - q^(n+1)) (1 - |b| q^n)),

    which dominates |t_{m+1}/t_m| for every m >= n and decreases in n; once
    rho(n) <= 1/2 the omitted tail is at most 2 |t_n| rho(n).
    """
    a, b, q, z = params.a, params.b, params.q, params.z
    eps = _as_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if z == 0:
        return ErrorBounded.exact(1)
    budget = term_budget(max_terms)
    total = Fraction(1)
    term = Fraction(1)
    qn = Fraction(1)  # q^(n-1) inside the loop below
    for n in range(1, budget + 1):
        factor_a = 1 - a * qn
        if factor_a == 0:
            # the numerator Pochhammer vanished: the series is a finite sum
            return ErrorBounded.exact(total)
        term *= factor_a * (-z) * qn / ((1 - q**n) * (1 - b * qn))
        total += term
        qn *= q
        bound_b = 1 - abs(b) * qn
        if bound_b <= 0:
            continue
        rho = abs(z) * qn * (1 + abs(a) * qn) / ((1 - q ** (n + 1)) * bound_b)
        if rho <= HALF:
            tail = 2 * abs(term) * rho
            if tail <= eps:
                return ErrorBounded(total, tail)
    raise BudgetExceededError(f"series tail below {eps} not reached within {budget} terms")


def char_series_value(lam, q, eps, max_terms: int | None = None) -> ErrorBounded:
    """Certified value of the characteristic series phi(0; q; q, lam)."""
    return phi11_certified(Phi11Params(Fraction(0), _as_rational(q), _as_rational(q), _as_rational(lam)), eps, max_terms)


@dataclass(frozen=True)
class SignEvidence:
    """Certificate for a strict sign: an exact partial sum whose magnitude
    dominates the rigorous bound on everything omitted."""

    sign: int
    terms_used: int
    partial_sum: Fraction
    tail_bound: Fraction


def char_series_sign(lam, q, max_terms: int | None = None) -> SignEvidence:
    """Certified strict sign of phi(0; q; q, lam) = 1 + sum_{k>=1} (-1)^k lam^k
    q^(k(k-1)/2) / ((q;q)_k)^2.

    Terms are accumulated exactly; a sign is returned only once the partial
    sum strictly dominates the geometric tail bound.  For rational lam off a
    root this always terminates because the terms decay superexponentially.
    Raises :class:`UndecidedSignError` at the term budget.
    """
    lam = _as_rational(lam)
    q = _as_rational(q)
    if not (0 < q < 1):
        raise ValueError("q must satisfy 0 < q < 1")
    budget = term_budget(max_terms)
    total = Fraction(1)
    term = Fraction(1)
    qk = Fraction(1)  # q^(k-1)
    for k in range(1, budget + 1):
        term *= -lam * qk / (1 - q**k) ** 2
        total += term
        qk *= q
        # q^m |lam| / (1-q^(m+1))^2 <= rho for all m >= k
        rho = abs(lam) * qk / (1 - q ** (k + 1)) ** 2
        if rho <= HALF:
            tail = 2 * abs(term) * rho
            if abs(total) > tail:
                return SignEvidence(1 if total > 0 else -1, k, total, tail)
    raise UndecidedSignError(
        f"undecided at budget ({budget} terms): argument may be extremely close to a root"
    )


def _shrink_until(radius_target: Fraction, compute, attempts: int = 5) -> ErrorBounded:
    # compute(eps) -> ErrorBounded; retry with smaller component eps until the
    # composed radius fits.
    eps = radius_target / 8
    for _ in range(attempts):
        result = compute(eps)
        if result.radius <= radius_target:
            return result
        eps /= 64
    raise BudgetExceededError("could not compose intervals to the requested radius")


def cauchy_sum_discrepancy(a, b, q, eps, max_terms: int | None = None) -> ErrorBounded:
    """Interval for phi(a; b; q, b/a) - (b/a;q)_inf / (b;q)_inf.

    The two sides agree identically, so the returned interval must contain 0;
    its width is the honest accounting of both truncations.
    """
    a = _as_rational(a)
    b = _as_rational(b)
    q = _as_rational(q)
    if a == 0:
        raise ValueError("the summed form needs a != 0")
    eps = _as_rational(eps)

    def compute(component_eps):
        lhs = phi11_certified(Phi11Params(a, b, q, b / a), component_eps, max_terms)
        num = qpochhammer_infinite(b / a, q, component_eps, max_terms)
        den = qpochhammer_infinite(b, q, component_eps, max_terms)
        return lhs - num / den

    return _shrink_until(eps, compute)


def transformation_discrepancy(b, q, z, eps, max_terms: int | None = None) -> ErrorBounded:
    """Interval for phi(0; b; q, z) - (z;q)_inf/(b;q)_inf * phi(0; z; q, b).

    Swapping the roles of b and z multiplies the series by the ratio of the
    two infinite products; the discrepancy interval must contain 0.
    """
    b = _as_rational(b)
    q = _as_rational(q)
    z = _as_rational(z)
    eps = _as_rational(eps)
    zero = Fraction(0)

    def compute(component_eps):
        lhs = phi11_certified(Phi11Params(zero, b, q, z), component_eps, max_terms)
        rhs = phi11_certified(Phi11Params(zero, z, q, b), component_eps, max_terms)
        num = qpochhammer_infinite(z, q, component_eps, max_terms)
        den = qpochhammer_infinite(b, q, component_eps, max_terms)
        return lhs - (num / den) * rhs

    return _shrink_until(eps, compute)
