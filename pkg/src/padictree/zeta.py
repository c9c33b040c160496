"""Spectral zeta functions of the half-line and tree operators.

For Re s > 0 the half-line zeta is the eigenvalue sum

    zeta0(s) = sum_{n>=1} lam_n^(-s),

evaluated from certified eigenvalue brackets: midpoints give the value, the
bracket widths propagate through |d/dx x^(-s)| bounds, and the tail beyond
the last refined eigenvalue is controlled by the certified lower bound
lam_n > q^(1-n) (1 - q^n/(1-q^n))^2, q = p^(-2).  The tree zeta multiplies
by a prefactor summing the fiber multiplicities:

    paper mode    (1 - 1/p) / (1 - p^(1-2s))        (printed form)
    totient mode  (1 - p^(-2s)) / (1 - p^(1-2s))    (multiplicity(0) = 1)

Analytic continuation subtracts a reference sequence mu_n with known closed
form and adds back the correction series sum (lam_n^(-s) - mu_n^(-s)).  Both
reference choices are first-class:

    paper mode       mu_n = p^n,        closed form p^(-s)/(1-p^(-s))
    asymptotic mode  mu_n = p^(2n-2),   closed form 1/(1-p^(-2s))

A perturbative reference must make the correction terms shrink relative to
the reference terms at rate p^(-2n); the decay diagnostic monitors the
observed term ratios and raises the "correction-non-decay" flag when they
miss that rate, which is exactly what happens in paper mode (the true
eigenvalue growth is p^(2n-2), not p^n).  Tails certified from brackets mark
the result rigorous; estimated tails carry the "heuristic-tail" flag.

Complex powers run in mpmath; directed-rounding slack is folded into every
error field.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .exactnum import BudgetExceededError
from .spectrum import eigenvalue_record, transported_bracket
from .tree import _prime_int

FLAG_NON_DECAY = "correction-non-decay"
FLAG_HEURISTIC_TAIL = "heuristic-tail"
FLAG_DIVERGENT = "correction-divergent"

PREFACTOR_MODES = ("paper", "totient")
REFERENCE_MODES = ("paper", "asymptotic")

_MAX_EIGS = 64


class PoleError(ValueError):
    """Evaluation requested on (or numerically indistinguishable from) a pole."""


def _to_fraction(x) -> Fraction:
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**15)
    raise TypeError(f"cannot interpret {x!r} as an exact real part")


@dataclass(frozen=True)
class ComplexS:
    """An exact complex argument; floatified only at evaluation time."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _to_fraction(self.re))
        object.__setattr__(self, "im", _to_fraction(self.im))

    @staticmethod
    def parse(text: str) -> "ComplexS":
        parts = text.split(",")
        if len(parts) == 1:
            return ComplexS(Fraction(parts[0].strip()))
        if len(parts) == 2:
            return ComplexS(Fraction(parts[0].strip()), Fraction(parts[1].strip()))
        raise ValueError("complex argument must be 're' or 're,im'")

    def mpc(self) -> mp.mpc:
        return mp.mpc(mp.mpf(self.re.numerator) / self.re.denominator,
                      mp.mpf(self.im.numerator) / self.im.denominator)

    def __str__(self) -> str:
        return f"{self.re}" if self.im == 0 else f"{self.re},{self.im}"


@dataclass(frozen=True)
class ZetaResult:
    s: ComplexS
    value: mp.mpc
    error: mp.mpf
    terms_used: int
    rigorous_tail: bool
    flags: tuple[str, ...] = ()


def _working_dps(eps: Fraction) -> int:
    digits = max(12, -_floor_log10(eps) + 6)
    return digits + 18


def _floor_log10(x: Fraction) -> int:
    # floor(log10 x) for x > 0, exactly
    n = 0
    while x < 1:
        x *= 10
        n -= 1
    while x >= 10:
        x /= 10
        n += 1
    return n


def _tail_bound_zeta0(p: int, n_used: int, sigma: mp.mpf) -> mp.mpf:
    """sum_{k > n_used} lam_k^(-sigma) <= C^(-sigma) q^(n_used*sigma)/(1-q^sigma)."""
    q = mp.mpf(1) / p**2
    qn = q ** (n_used + 1)
    c = (1 - qn / (1 - qn)) ** 2
    return c ** (-sigma) * q ** (n_used * sigma) / (1 - q**sigma) * (1 + mp.mpf(10) ** (-8))


def _power_term(value: Fraction, s: mp.mpc) -> mp.mpc:
    return mp.power(mp.mpf(value.numerator) / value.denominator, -s)


def zeta_D0(p, s: ComplexS, eps, max_eigs: int = _MAX_EIGS, digits: int | None = None) -> ZetaResult:
    """Certified evaluation of the half-line zeta for Re s > 0 with total
    error at most eps (bracket widths + tail + rounding slack)."""
    p = _prime_int(p)
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if s.re <= 0:
        raise ValueError("the eigenvalue sum needs Re s > 0")
    if digits is None:
        digits = max(12, -_floor_log10(eps) + 6)
    dps = _working_dps(eps)
    with mp.workdps(dps):
        s_val = s.mpc()
        sigma = s_val.real
        abs_s = abs(s_val)
        slack = mp.mpf(10) ** (-(dps - 8))
        total = mp.mpc(0)
        unc = mp.mpf(0)
        eps_half = mp.mpf(eps.numerator) / eps.denominator / 2
        n = 0
        while True:
            n += 1
            if n > max_eigs:
                raise BudgetExceededError("eps unreachable within the eigenvalue budget")
            record = eigenvalue_record(p, n, digits)
            term = _power_term(record.midpoint, s_val)
            total += term
            width = record.hi - record.lo
            lo_f = mp.mpf(record.lo.numerator) / record.lo.denominator
            unc += abs_s * lo_f ** (-sigma - 1) * mp.mpf(width.numerator) / width.denominator
            unc += abs(term) * slack
            tail = _tail_bound_zeta0(p, n, sigma)
            if tail <= eps_half and unc <= eps_half:
                return ZetaResult(s, total, tail + unc, n, True)


def prefactor(p, s: ComplexS, mode: str = "totient", dps: int = 40) -> mp.mpc:
    """Multiplicity-sum factor linking the tree zeta to the half-line zeta."""
    p = _prime_int(p)
    if mode not in PREFACTOR_MODES:
        raise ValueError(f"prefactor mode must be one of {PREFACTOR_MODES}")
    with mp.workdps(dps):
        s_val = s.mpc()
        den = 1 - mp.power(p, 1 - 2 * s_val)
        if abs(den) < mp.mpf(10) ** (-(dps - 10)):
            raise PoleError(f"prefactor pole at s = {s}")
        if mode == "paper":
            num = mp.mpf(1) - mp.mpf(1) / p
        else:
            num = 1 - mp.power(p, -2 * s_val)
        return num / den


def zeta_D(p, s: ComplexS, eps, prefactor_mode: str = "totient",
           max_eigs: int = _MAX_EIGS) -> ZetaResult:
    """Tree zeta: prefactor(s) * zeta0(s); needs Re s > 1/2 so the
    multiplicity sum behind the prefactor converges."""
    p = _prime_int(p)
    eps = Fraction(eps)
    if s.re <= Fraction(1, 2):
        raise ValueError("the tree zeta needs Re s > 1/2")
    dps = _working_dps(eps)
    with mp.workdps(dps):
        factor = prefactor(p, s, prefactor_mode, dps)
        scale = max(abs(factor), mp.mpf(1))
        inner_eps = eps / (4 * int(mp.ceil(scale)))
        inner = zeta_D0(p, s, inner_eps, max_eigs)
        value = factor * inner.value
        error = abs(factor) * inner.error + abs(value) * mp.mpf(10) ** (-(dps - 8))
        return ZetaResult(s, value, error, inner.terms_used, inner.rigorous_tail, inner.flags)


def schatten_trace(p, s, eps, prefactor_mode: str = "totient") -> ZetaResult:
    """Trace of the inverse tree operator raised to the real power s > 1/2
    (finite for every such s; the spectrum grows geometrically)."""
    s_frac = _to_fraction(s)
    if s_frac <= Fraction(1, 2):
        raise ValueError("the Schatten trace needs real s > 1/2")
    return zeta_D(p, ComplexS(s_frac), eps, prefactor_mode)


def _reference_value(p: int, mode: str, n: int) -> Fraction:
    if mode == "paper":
        return Fraction(p**n)
    return Fraction(p ** (2 * n - 2))


def _closed_form(p: int, mode: str, s_val: mp.mpc, dps: int) -> mp.mpc:
    if mode == "paper":
        den = 1 - mp.power(p, -s_val)
        if abs(den) < mp.mpf(10) ** (-(dps - 10)):
            raise PoleError("reference closed form pole")
        return mp.power(p, -s_val) / den
    den = 1 - mp.power(p, -2 * s_val)
    if abs(den) < mp.mpf(10) ** (-(dps - 10)):
        raise PoleError("reference closed form pole")
    return 1 / den


def zeta_D0_continued(p, s: ComplexS, eps, reference_mode: str = "asymptotic",
                      max_eigs: int = _MAX_EIGS, digits: int | None = None) -> ZetaResult:
    """Reference-subtracted evaluation valid beyond the eigenvalue sum's
    abscissa: closed_form + sum_n (lam_n^(-s) - mu_n^(-s)).

    The correction terms are monitored: their observed geometric decay must
    beat the reference term ratio by the perturbative factor p^(-2) (within
    a sqrt(p) slack) or the "correction-non-decay" flag fires.  For Re s > 0
    the tail is certified from the brackets; otherwise it is estimated from
    the observed ratio and flagged "heuristic-tail".
    """
    p = _prime_int(p)
    eps = Fraction(eps)
    if reference_mode not in REFERENCE_MODES:
        raise ValueError(f"reference mode must be one of {REFERENCE_MODES}")
    if s.re <= -2:
        raise ValueError("continuation implemented for Re s > -2 only")
    if digits is None:
        digits = max(12, -_floor_log10(eps) + 6)
    dps = _working_dps(eps)
    with mp.workdps(dps):
        s_val = s.mpc()
        sigma = s_val.real
        abs_s = abs(s_val)
        slack = mp.mpf(10) ** (-(dps - 8))
        closed = _closed_form(p, reference_mode, s_val, dps)
        eps_f = mp.mpf(eps.numerator) / eps.denominator
        total = mp.mpc(0)
        unc = mp.mpf(0)
        corr_sizes: list[mp.mpf] = []
        n = 0
        while n < max_eigs:
            n += 1
            record = eigenvalue_record(p, n, digits)
            mu = _reference_value(p, reference_mode, n)
            corr = _power_term(record.midpoint, s_val) - _power_term(mu, s_val)
            total += corr
            corr_sizes.append(abs(corr))
            width = record.hi - record.lo
            endpoint = record.lo if sigma >= -1 else record.hi
            endpoint_f = mp.mpf(endpoint.numerator) / endpoint.denominator
            unc += abs_s * endpoint_f ** (-sigma - 1) * mp.mpf(width.numerator) / width.denominator
            unc += (abs(corr) + 1) * slack
            if n >= 12 and corr_sizes[-1] <= eps_f / 8 and sigma > 0:
                break
        flags: list[str] = []
        # observed decay over a trailing window, against the perturbative rate
        window = min(8, len(corr_sizes) - 4)
        observed = None
        if window >= 2 and corr_sizes[-window - 1] > 0:
            observed = (corr_sizes[-1] / corr_sizes[-window - 1]) ** (mp.mpf(1) / window)
            ref_ratio = mp.power(p, -sigma) if reference_mode == "paper" else mp.power(p, -2 * sigma)
            required = ref_ratio / p**2
            if observed > required * mp.sqrt(p):
                flags.append(FLAG_NON_DECAY)
            if observed >= 1:
                flags.append(FLAG_DIVERGENT)
        if sigma > 0:
            lam_tail = _tail_bound_zeta0(p, n, sigma)
            if reference_mode == "paper":
                mu_first = mp.power(p, -(n + 1) * sigma)
                ratio = mp.power(p, -sigma)
            else:
                mu_first = mp.power(p, -2 * n * sigma)
                ratio = mp.power(p, -2 * sigma)
            mu_tail = mu_first / (1 - ratio)
            tail = lam_tail + mu_tail
            rigorous = True
        else:
            rigorous = False
            flags.append(FLAG_HEURISTIC_TAIL)
            if observed is not None and observed < 1:
                tail = corr_sizes[-1] * observed / (1 - observed)
            else:
                tail = mp.inf
        return ZetaResult(s, closed + total, tail + unc, n, rigorous, tuple(flags))


@dataclass(frozen=True)
class Pole:
    re: str
    im: str
    k: int
    provenance: str


def pole_list(p, mode: str = "paper", k_max: int = 3, dps: int = 30) -> tuple[Pole, ...]:
    """Pole families of the tree zeta implied by the chosen reference mode.

    The prefactor contributes s = 1/2 (1 - 2 pi i k / ln p) in every mode;
    the reference sum contributes s = 2 pi i k / ln p in paper mode and
    s = pi i k / ln p under the verified eigenvalue asymptotics.
    """
    p = _prime_int(p)
    if mode not in REFERENCE_MODES:
        raise ValueError(f"mode must be one of {REFERENCE_MODES}")
    out = []
    with mp.workdps(dps):
        step = 2 * mp.pi / mp.log(p) if mode == "paper" else mp.pi / mp.log(p)
        for k in range(-k_max, k_max + 1):
            out.append(Pole(mp.nstr(mp.mpf(0), dps - 10), mp.nstr(step * k, dps - 10), k, "reference-sum"))
        for k in range(-k_max, k_max + 1):
            im = -mp.pi * k / mp.log(p)
            out.append(Pole(mp.nstr(mp.mpf(1) / 2, dps - 10), mp.nstr(im, dps - 10), k, "prefactor"))
    return tuple(out)
