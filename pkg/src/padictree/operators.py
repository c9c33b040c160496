"""Forward-derivative operators on the ball tree and their half-line models.

Functions on the tree are stored level by level (`TreeFunction`); functions
on a single fiber are plain finitely supported sequences (`HalfLineSeq`).
All operator actions are exact whenever the entries are exact: the formulas
only multiply by integer powers of p and divide by p.

Vertex-side actions (f indexed by (n, k)):

    (D f)_n(k)  = p^n (f_n(k) - (1/p) sum_{0<=j<p} f_{n+1}(k + j p^n))
    (D* g)_n(k) = p^n (g_n(k) - (1/p) g_{n-1}(k mod p^(n-1))),  g_{-1} = 0

Frequency-side actions (indexed by (n, l) after the per-level DFT):

    (Dhat f)_n(l)  = p^n (f_n(l) - f_{n+1}(p l))
    (Dhat* g)_n(l) = p^n g_n(l)                      if p does not divide l
                   = p^n (g_n(l) - (1/p) g_{n-1}(l/p))  otherwise

Half-line model on one fiber (sequences over l = 0, 1, 2, ...):

    (D0 f)_n  = p^n (f_n - f_{n+1})
    (D0* g)_n = p^n (g_n - g_{n-1}/p)
    (D0*D0 f)_0 = f_0 - f_1
    (D0*D0 f)_n = p^(2n-2) (-p^2 f_{n+1} + (1+p^2) f_n - f_{n-1}),  n >= 1

Entries beyond the stored depth are implicitly zero (Dirichlet truncation).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .config import float_dps
from .tree import Vertex, _prime_int

_TREE_DIM_LIMIT = 4096


def _conj(x):
    return x.conjugate() if hasattr(x, "conjugate") else x


@dataclass(frozen=True)
class TreeFunction:
    """A function on tree levels 0..depth, level n holding exactly p^n entries."""

    p: int
    depth: int
    levels: tuple[tuple, ...]

    def __post_init__(self):
        p = _prime_int(self.p)
        object.__setattr__(self, "p", p)
        if self.depth < 0 or len(self.levels) != self.depth + 1:
            raise ValueError("levels must cover 0..depth")
        frozen = []
        for n, level in enumerate(self.levels):
            level = tuple(level)
            if len(level) != p**n:
                raise ValueError(f"level {n} must hold p^{n} entries")
            frozen.append(level)
        object.__setattr__(self, "levels", tuple(frozen))

    @classmethod
    def zeros(cls, p, depth: int) -> "TreeFunction":
        p = _prime_int(p)
        return cls(p, depth, tuple(tuple(0 for _ in range(p**n)) for n in range(depth + 1)))

    @classmethod
    def delta(cls, p, depth: int, v: Vertex, value=1) -> "TreeFunction":
        p = _prime_int(p)
        levels = [[0] * p**n for n in range(depth + 1)]
        levels[v.n][v.k] = value
        return cls(p, depth, tuple(tuple(level) for level in levels))

    def value(self, n: int, k: int):
        if n > self.depth:
            return 0
        return self.levels[n][k]


def apply_D(f: TreeFunction) -> TreeFunction:
    p, depth = f.p, f.depth
    out = []
    for n in range(depth + 1):
        scale = p**n
        row = []
        for k in range(p**n):
            child_sum = 0
            if n < depth:
                for j in range(p):
                    child_sum = child_sum + f.levels[n + 1][k + j * scale]
            row.append(scale * (f.levels[n][k] - child_sum / p))
        out.append(tuple(row))
    return TreeFunction(p, depth, tuple(out))


def apply_Dstar(g: TreeFunction) -> TreeFunction:
    p, depth = g.p, g.depth
    out = [tuple(g.levels[0])]  # p^0 (g_0 - g_{-1}/p) with g_{-1} = 0
    for n in range(1, depth + 1):
        scale = p**n
        size_above = p ** (n - 1)
        row = tuple(
            scale * (g.levels[n][k] - g.levels[n - 1][k % size_above] / p)
            for k in range(p**n)
        )
        out.append(row)
    return TreeFunction(p, depth, tuple(out))


def apply_Dhat(f: TreeFunction) -> TreeFunction:
    p, depth = f.p, f.depth
    out = []
    for n in range(depth + 1):
        scale = p**n
        row = tuple(
            scale * (f.levels[n][l] - (f.levels[n + 1][p * l] if n < depth else 0))
            for l in range(p**n)
        )
        out.append(row)
    return TreeFunction(p, depth, tuple(out))


def apply_Dhatstar(g: TreeFunction) -> TreeFunction:
    p, depth = g.p, g.depth
    out = []
    for n in range(depth + 1):
        scale = p**n
        row = []
        for l in range(p**n):
            if l % p != 0:
                row.append(scale * g.levels[n][l])
            else:
                below = g.levels[n - 1][l // p] if n >= 1 else 0
                row.append(scale * (g.levels[n][l] - below / p))
        out.append(tuple(row))
    return TreeFunction(p, depth, tuple(out))


def tree_inner(f: TreeFunction, g: TreeFunction):
    """Weighted pairing sum_v f(v) conj(g(v)) p^(-n)."""
    if (f.p, f.depth) != (g.p, g.depth):
        raise ValueError("mismatched tree functions")
    total = 0
    for n in range(f.depth + 1):
        w = Fraction(1, f.p**n)
        level = sum(a * _conj(b) for a, b in zip(f.levels[n], g.levels[n]) if a and b) * w
        total = total + level
    return total


def hat_inner(f: TreeFunction, g: TreeFunction):
    """Unweighted pairing on the frequency side."""
    if (f.p, f.depth) != (g.p, g.depth):
        raise ValueError("mismatched tree functions")
    return sum(
        a * _conj(b)
        for n in range(f.depth + 1)
        for a, b in zip(f.levels[n], g.levels[n])
        if a and b
    )


def restrict_to_fiber(f: TreeFunction, r: int, m: int) -> tuple:
    """Values of a frequency-side function along the fiber (r, m), indexed by l."""
    p = f.p
    out = []
    l = 0
    while m + l <= f.depth:
        out.append(f.levels[m + l][r * p**l])
        l += 1
    return tuple(out)


def embed_fiber(p, depth: int, r: int, m: int, values) -> TreeFunction:
    """Frequency-side function supported on the single fiber (r, m)."""
    p = _prime_int(p)
    levels = [[0] * p**n for n in range(depth + 1)]
    for l, x in enumerate(values):
        if m + l > depth:
            raise ValueError("fiber values exceed the stored depth")
        levels[m + l][r * p**l] = x
    return TreeFunction(p, depth, tuple(tuple(level) for level in levels))


@dataclass(frozen=True)
class HalfLineSeq:
    """Finitely supported sequence over n = 0, 1, 2, ... (zero beyond)."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def __len__(self) -> int:
        return len(self.values)

    def value(self, n: int):
        return self.values[n] if 0 <= n < len(self.values) else 0

    def l2sq(self):
        return sum(v * _conj(v) for v in self.values)

    def trimmed(self) -> "HalfLineSeq":
        values = list(self.values)
        while values and values[-1] == 0:
            values.pop()
        return HalfLineSeq(tuple(values))

    def __sub__(self, other: "HalfLineSeq") -> "HalfLineSeq":
        size = max(len(self), len(other))
        return HalfLineSeq(tuple(self.value(n) - other.value(n) for n in range(size)))


def apply_D0(p, f: HalfLineSeq) -> HalfLineSeq:
    p = _prime_int(p)
    return HalfLineSeq(
        tuple(p**n * (f.value(n) - f.value(n + 1)) for n in range(len(f)))
    )


def apply_D0star(p, g: HalfLineSeq) -> HalfLineSeq:
    p = _prime_int(p)
    return HalfLineSeq(
        tuple(p**n * (g.value(n) - g.value(n - 1) / p) for n in range(len(g) + 1))
    )


def apply_D0starD0(p, f: HalfLineSeq) -> HalfLineSeq:
    p = _prime_int(p)
    out = [f.value(0) - f.value(1)]
    for n in range(1, len(f) + 1):
        out.append(
            p ** (2 * n - 2)
            * (-(p**2) * f.value(n + 1) + (1 + p**2) * f.value(n) - f.value(n - 1))
        )
    return HalfLineSeq(tuple(out))


@dataclass(frozen=True)
class TruncMatrix:
    """Dense truncation of an operator with Dirichlet boundary (coordinates
    beyond the cutoff treated as zero).  `exact` marks rational entries;
    the tree matrix carries square roots of p and is held in floating form."""

    op_id: str
    p: int
    dim: int
    boundary: str
    exact: bool
    entries: tuple[tuple, ...]

    def __post_init__(self):
        if len(self.entries) != self.dim or any(len(row) != self.dim for row in self.entries):
            raise ValueError("entries must be a dim x dim square array")


def _d0_matrix(p: int, size: int) -> list[list[Fraction]]:
    rows = []
    for n in range(size):
        row = [Fraction(0)] * size
        row[n] = Fraction(p**n)
        if n + 1 < size:
            row[n + 1] = Fraction(-(p**n))
        rows.append(row)
    return rows


def _d0star_d0_matrix(p: int, size: int) -> list[list[Fraction]]:
    rows = []
    for n in range(size):
        row = [Fraction(0)] * size
        if n == 0:
            row[0] = Fraction(1)
        else:
            row[n] = Fraction(p ** (2 * n) + p ** (2 * n - 2))
            row[n - 1] = Fraction(-(p ** (2 * n - 2)))
        if n + 1 < size:
            row[n + 1] = Fraction(-(p ** (2 * n)))
        rows.append(row)
    return rows


def tree_vertex_count(p: int, depth: int) -> int:
    return sum(p**n for n in range(depth + 1))


def tree_btb_split(p, depth: int) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """Exact data of the symmetrized tree matrix.

    In the orthonormalized basis e_v / sqrt(w(v)) the truncated forward
    derivative becomes B = R + S sqrt(p) with rational R (diagonal, p^n) and
    S (parent-to-child entries, -p^(n-1)).  The symmetric matrix actually
    eigensolved is B^T B = (R^T R + p S^T S) + (R^T S + S^T R) sqrt(p); the
    two rational matrices returned here are exact, so the only floating step
    anywhere in the tree oracle is the final sqrt(p) combination.
    """
    p = _prime_int(p)
    dim = tree_vertex_count(p, depth)
    if dim > _TREE_DIM_LIMIT:
        raise ValueError(f"tree dimension {dim} exceeds the configured limit {_TREE_DIM_LIMIT}")
    index = {}
    count = 0
    for n in range(depth + 1):
        for k in range(p**n):
            index[(n, k)] = count
            count += 1
    # B rows: diagonal R[i][i] = p^n, child entries S[i][child] = -p^(n-1)
    diag = [Fraction(0)] * dim
    child_entries: list[list[tuple[int, Fraction]]] = [[] for _ in range(dim)]
    for n in range(depth + 1):
        for k in range(p**n):
            i = index[(n, k)]
            diag[i] = Fraction(p**n)
            if n < depth:
                coeff = Fraction(-(p ** (n - 1)), 1) if n >= 1 else Fraction(-1, p)
                for j in range(p):
                    child_entries[i].append((index[(n + 1, k + j * p**n)], coeff))
    m0 = [[Fraction(0)] * dim for _ in range(dim)]
    m1 = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(dim):
        # (B^T B)[a][b] = sum_i B[i][a] B[i][b]; row i has rational diagonal
        # and sqrt(p)-weighted child entries.
        di = diag[i]
        m0[i][i] += di * di
        for a, ca in child_entries[i]:
            m1[i][a] += di * ca
            m1[a][i] += di * ca
            for b, cb in child_entries[i]:
                m0[a][b] += p * ca * cb
    return m0, m1


def truncated_matrix(op_id: str, p, size: int, dps: int | None = None) -> TruncMatrix:
    """Exact Dirichlet truncations.

    Half-line ids ("d0", "d0star_d0") produce size x size rational matrices
    over indices 0..size-1.  The tree id ("tree_dstar_d") takes `size` as the
    depth and produces the orthonormalized symmetric matrix with sqrt(p)
    entries evaluated at `dps` digits.
    """
    p = _prime_int(p)
    if op_id == "d0":
        if size < 1:
            raise ValueError("size must be >= 1")
        rows = _d0_matrix(p, size)
        return TruncMatrix("d0", p, size, "dirichlet", True, tuple(tuple(r) for r in rows))
    if op_id == "d0star_d0":
        if size < 1:
            raise ValueError("size must be >= 1")
        rows = _d0star_d0_matrix(p, size)
        return TruncMatrix("d0star_d0", p, size, "dirichlet", True, tuple(tuple(r) for r in rows))
    if op_id == "tree_dstar_d":
        m0, m1 = tree_btb_split(p, size)
        dim = len(m0)
        with mp.workdps(float_dps(dps)):
            sqrt_p = mp.sqrt(p)
            rows = tuple(
                tuple(mp.mpmathify(m0[i][j]) + mp.mpmathify(m1[i][j]) * sqrt_p for j in range(dim))
                for i in range(dim)
            )
        return TruncMatrix("tree_dstar_d", p, dim, "dirichlet", False, rows)
    raise ValueError(f"unknown operator id {op_id!r}")


def transpose(m: TruncMatrix) -> TruncMatrix:
    return TruncMatrix(
        m.op_id + "_T", m.p, m.dim, m.boundary, m.exact,
        tuple(tuple(m.entries[j][i] for j in range(m.dim)) for i in range(m.dim)),
    )


def matmul(a: TruncMatrix, b: TruncMatrix) -> tuple[tuple, ...]:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    dim = a.dim
    return tuple(
        tuple(sum(a.entries[i][k] * b.entries[k][j] for k in range(dim)) for j in range(dim))
        for i in range(dim)
    )


def to_matrix_market(m: TruncMatrix) -> str:
    """Plain-text dump: a comment header, the dimensions, then row-major
    entries as "num/den" (exact matrices only)."""
    if not m.exact:
        raise ValueError("only exact rational matrices serialize to this format")
    lines = [f"% padictree truncated matrix op={m.op_id} p={m.p} boundary={m.boundary}"]
    lines.append(f"{m.dim} {m.dim}")
    for row in m.entries:
        for x in row:
            x = Fraction(x)
            lines.append(f"{x.numerator}/{x.denominator}")
    return "\n".join(lines) + "\n"


def from_matrix_market(text: str) -> TruncMatrix:
    lines = [line for line in text.splitlines() if line.strip()]
    header = lines[0]
    if not header.startswith("%"):
        raise ValueError("missing header line")
    meta = dict(part.split("=", 1) for part in header[1:].split() if "=" in part)
    rows_cols = lines[1].split()
    dim = int(rows_cols[0])
    if int(rows_cols[1]) != dim:
        raise ValueError("matrix must be square")
    flat = [Fraction(s) for s in lines[2:]]
    if len(flat) != dim * dim:
        raise ValueError("entry count does not match the dimension header")
    entries = tuple(tuple(flat[i * dim : (i + 1) * dim]) for i in range(dim))
    return TruncMatrix(meta.get("op", "unknown"), int(meta.get("p", 0)), dim,
                       meta.get("boundary", "dirichlet"), True, entries)
