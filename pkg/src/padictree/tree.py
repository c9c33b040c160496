"""The rooted tree of p-adic balls: coordinates, weights, and the per-level DFT.

Level n holds the p^n balls of diameter p^(-n); the ball containing the
integer k (0 <= k < p^n) is the vertex (n, k), and its Haar volume p^(-n) is
the weight used throughout the weighted function spaces.  Vertices also carry
a second coordinate system (r/p^m, l): factor k = r p^l with p not dividing
r, put m = n - l.  Points sharing (r, m) form one infinite path ("fiber")
indexed by l, and the invariant subspaces of the derivative operators live on
exactly these fibers.

Nothing here materializes the tree; all structure is (n, k) arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath as mp

from .config import float_dps


@dataclass(frozen=True)
class Prime:
    """A prime base, checked by trial division at construction."""

    p: int

    def __post_init__(self):
        p = self.p
        if not isinstance(p, int) or p < 2:
            raise ValueError(f"{p!r} is not a prime")
        d = 2
        while d * d <= p:
            if p % d == 0:
                raise ValueError(f"{p} is not a prime")
            d += 1


def _prime_int(p) -> int:
    return p.p if isinstance(p, Prime) else Prime(p).p


class Vertex(NamedTuple):
    n: int
    k: int


class PruferPoint(NamedTuple):
    r: int
    m: int
    l: int


class LevelData(NamedTuple):
    level: int
    values: tuple


def check_vertex(p, v: Vertex) -> None:
    p = _prime_int(p)
    if v.n < 0 or not (0 <= v.k < p**v.n):
        raise ValueError(f"vertex {v} invalid for p={p}")


def children(p, v: Vertex) -> tuple[Vertex, ...]:
    """The p vertices below (n, k): (n+1, k + j p^n) in increasing k."""
    p = _prime_int(p)
    check_vertex(p, v)
    step = p**v.n
    return tuple(Vertex(v.n + 1, v.k + j * step) for j in range(p))


def parent(p, v: Vertex) -> Vertex:
    """The vertex above (n, k): (n-1, k mod p^(n-1)); the root has no parent."""
    p = _prime_int(p)
    check_vertex(p, v)
    if v.n == 0:
        raise ValueError("the root has no parent")
    return Vertex(v.n - 1, v.k % p ** (v.n - 1))


def weight(p, v: Vertex) -> Fraction:
    """Haar volume of the ball: p^(-n)."""
    p = _prime_int(p)
    check_vertex(p, v)
    return Fraction(1, p**v.n)


def to_prufer(p, v: Vertex) -> PruferPoint:
    """(n, k) -> (r, m, l): k = r p^l with p not dividing r, m = n - l.

    k = 0 maps to the identity fiber (r, m) = (0, 0) with l = n.
    """
    p = _prime_int(p)
    check_vertex(p, v)
    if v.k == 0:
        return PruferPoint(0, 0, v.n)
    r, l = v.k, 0
    while r % p == 0:
        r //= p
        l += 1
    return PruferPoint(r, v.n - l, l)


def check_prufer(p, pt: PruferPoint) -> None:
    p = _prime_int(p)
    if pt.l < 0 or pt.m < 0:
        raise ValueError(f"prufer point {pt} invalid")
    if pt.m == 0:
        if pt.r != 0:
            raise ValueError(f"prufer point {pt}: m = 0 forces r = 0")
    elif not (0 < pt.r < p**pt.m) or pt.r % p == 0:
        raise ValueError(f"prufer point {pt} invalid for p={p}")


def from_prufer(p, pt: PruferPoint) -> Vertex:
    """(r, m, l) -> (m + l, r p^l), inverse of :func:`to_prufer`."""
    p = _prime_int(p)
    check_prufer(p, pt)
    return Vertex(pt.m + pt.l, pt.r * p**pt.l)


def fiber_representatives(p, m: int) -> tuple[int, ...]:
    """All r values of fibers at denominator exponent m: the units mod p^m
    (just r = 0 when m = 0)."""
    p = _prime_int(p)
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return (0,)
    return tuple(r for r in range(1, p**m) if r % p != 0)


def _check_level(p: int, data: LevelData) -> None:
    if data.level < 0 or len(data.values) != p**data.level:
        raise ValueError(f"level data has {len(data.values)} entries, expected p^{data.level}")


def level_dft(p, data: LevelData, dps: int | None = None) -> LevelData:
    """Forward transform on one level: fhat(l) = p^(-n) sum_k f(k) e^(-2 pi i k l / p^n).

    Computed in mpmath complex arithmetic at `dps` digits (default from
    config, 64).  Naive summation roundoff is below p^n * max|f| * 10^(5-dps),
    many orders under every tolerance used in the tests.
    """
    p = _prime_int(p)
    _check_level(p, data)
    return _dft(p, data, -1, Fraction(1, p**data.level), dps)


def level_idft(p, data: LevelData, dps: int | None = None) -> LevelData:
    """Inverse transform: f(k) = sum_l fhat(l) e^(+2 pi i k l / p^n)."""
    p = _prime_int(p)
    _check_level(p, data)
    return _dft(p, data, +1, Fraction(1), dps)


def _dft(p: int, data: LevelData, sign: int, scale: Fraction, dps: int | None) -> LevelData:
    size = p**data.level
    with mp.workdps(float_dps(dps)):
        values = [mp.mpmathify(v) for v in data.values]
        out = []
        for l in range(size):
            acc = mp.mpc(0)
            for k, v in enumerate(values):
                acc += v * mp.expjpi(mp.mpf(2 * sign * ((k * l) % size)) / size)
            out.append(acc * mp.mpf(scale.numerator) / scale.denominator)
        return LevelData(data.level, tuple(out))


def tree_dot(p, depth: int) -> str:
    """DOT text of the truncated tree; vertex labels are "n:k" and each vertex
    carries its weight as an attribute."""
    p = _prime_int(p)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    lines = ["graph padic_tree {"]
    for n in range(depth + 1):
        for k in range(p**n):
            w = Fraction(1, p**n)
            lines.append(f'  "{n}:{k}" [weight="{w}"];')
    for n in range(depth):
        for k in range(p**n):
            for child in children(p, Vertex(n, k)):
                lines.append(f'  "{n}:{k}" -- "{child.n}:{child.k}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_as_dict(p, depth: int) -> dict:
    """JSON-ready structure dump of the truncated tree."""
    p = _prime_int(p)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    vertices = []
    edges = []
    for n in range(depth + 1):
        for k in range(p**n):
            v = Vertex(n, k)
            pt = to_prufer(p, v)
            vertices.append(
                {
                    "n": n,
                    "k": k,
                    "weight": str(Fraction(1, p**n)),
                    "fiber_r": pt.r,
                    "fiber_m": pt.m,
                    "fiber_l": pt.l,
                }
            )
            if n < depth:
                edges.extend([[f"{n}:{k}", f"{c.n}:{c.k}"] for c in children(p, v)])
    return {"p": p, "depth": depth, "vertices": vertices, "edges": edges}


def tree_json(p, depth: int) -> str:
    return json.dumps(tree_as_dict(p, depth), indent=2, sort_keys=True) + "\n"
