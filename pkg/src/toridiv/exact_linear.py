"""Exact rational and integer linear algebra.

Every quantity in the package is a :class:`fractions.Fraction` or a Python
``int``; nothing here touches floating point. Vectors are plain tuples.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DomainError, UsageError

Rational = Fraction
Vector = tuple
Matrix = list

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(value: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int. Accepts U+2212 as a minus sign."""
    if isinstance(value, bool):
        raise UsageError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if not isinstance(value, str):
        raise UsageError(f"not a rational: {value!r}")
    text = value.strip().replace("−", "-")
    if not _RATIONAL_RE.match(text):
        raise UsageError(f"cannot parse rational {value!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise UsageError(f"zero denominator in {value!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(q: Union[Fraction, int]) -> str:
    return str(Fraction(q))


def dot(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise UsageError(f"pairing of vectors with lengths {len(a)} and {len(b)}")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def to_fractions(v: Iterable) -> tuple:
    return tuple(Fraction(x) for x in v)


def lcm_of_denominators(values: Iterable) -> int:
    out = 1
    for x in values:
        out = math.lcm(out, Fraction(x).denominator)
    return out


def content(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = math.gcd(g, int(x))
    return g


def primitivize(u: Sequence[int]) -> tuple:
    """Divide an integer vector by the gcd of its entries; signs are kept."""
    if any(Fraction(x).denominator != 1 for x in u):
        raise DomainError(f"primitivize expects an integer vector, got {tuple(u)}")
    u = tuple(int(x) for x in u)
    g = content(u)
    if g == 0:
        raise DomainError("cannot primitivize the zero vector")
    return tuple(x // g for x in u)


def integer_direction(v: Sequence) -> tuple:
    """Primitive integer vector on the ray through a nonzero rational vector."""
    v = to_fractions(v)
    scale = lcm_of_denominators(v)
    return primitivize(tuple(int(x * scale) for x in v))


def mat_vec(A: Sequence[Sequence], x: Sequence) -> tuple:
    return tuple(dot(row, x) for row in A)


def vec_mat(y: Sequence, A: Sequence[Sequence]) -> tuple:
    if not A:
        return ()
    cols = len(A[0])
    return tuple(sum((y[i] * A[i][j] for i in range(len(A))), Fraction(0)) for j in range(cols))


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list:
    if A and len(A[0]) != len(B):
        raise UsageError("matrix dimensions do not agree")
    cols = len(B[0]) if B else 0
    return [[sum(row[k] * B[k][j] for k in range(len(B))) for j in range(cols)] for row in A]


def transpose(A: Sequence[Sequence]) -> list:
    return [list(col) for col in zip(*A)] if A else []


def identity(n: int) -> list:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _check_rectangular(A: Sequence[Sequence]) -> int:
    if not A:
        return 0
    width = len(A[0])
    for i, row in enumerate(A):
        if len(row) != width:
            raise UsageError(f"row {i} has length {len(row)}, expected {width}")
    return width


@dataclass(frozen=True)
class Solution:
    """A particular solution ``x`` plus a basis of the kernel of ``A``."""

    x: tuple
    kernel: tuple


@dataclass(frozen=True)
class Inconsistent:
    """Certificate ``y`` with ``y·A = 0`` and ``y·b != 0``."""

    certificate: tuple


def rref(A: Sequence[Sequence]) -> tuple[list, list]:
    """Reduced row echelon form over Q. Returns (matrix, pivot columns)."""
    M = [[Fraction(x) for x in row] for row in A]
    pivots: list[int] = []
    r = 0
    width = len(M[0]) if M else 0
    for c in range(width):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots


def rank(A: Sequence[Sequence]) -> int:
    if not A:
        return 0
    return len(rref(A)[1])


def nullspace(A: Sequence[Sequence], ncols: int | None = None) -> tuple:
    """Basis of {x : A x = 0}, one vector per free column."""
    if ncols is None:
        ncols = _check_rectangular(A)
    if not A:
        return tuple(tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols))
    R, pivots = rref(A)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            v[pc] = -R[row_idx][f]
        basis.append(tuple(v))
    return tuple(basis)


def solve_rational(A: Sequence[Sequence], b: Sequence) -> Union[Solution, Inconsistent]:
    """Solve ``A x = b`` exactly.

    Gaussian elimination with first-nonzero pivoting on ``[A | b | I]``; the
    identity block records the row combinations, which is where the
    infeasibility certificate comes from. Every returned solution is
    re-substituted before it leaves this function.
    """
    ncols = _check_rectangular(A)
    m = len(A)
    if len(b) != m:
        raise UsageError(f"matrix has {m} rows but right-hand side has {len(b)} entries")
    if m == 0:
        return Solution(tuple(Fraction(0) for _ in range(ncols)), nullspace([], ncols))
    aug = [
        [Fraction(x) for x in A[i]] + [Fraction(b[i])] + [Fraction(int(i == j)) for j in range(m)]
        for i in range(m)
    ]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][ncols] != 0:
            y = tuple(aug[i][ncols + 1 :])
            assert all(v == 0 for v in vec_mat(y, A)) and dot(y, b) != 0
            return Inconsistent(y)
    x = [Fraction(0)] * ncols
    for row_idx, pc in enumerate(pivots):
        x[pc] = aug[row_idx][ncols]
    x = tuple(x)
    assert mat_vec(A, x) == tuple(Fraction(v) for v in b), "substitution check failed"
    R = [row[:ncols] for row in aug[:r]]
    free = [c for c in range(ncols) if c not in pivots]
    kernel = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            v[pc] = -R[row_idx][f]
        kernel.append(tuple(v))
    return Solution(x, tuple(kernel))


def integer_det(A: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss, fraction free)."""
    n = len(A)
    if any(len(row) != n for row in A):
        raise UsageError("determinant of a non-square matrix")
    if n == 0:
        return 1
    M = [[int(x) for x in row] for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def is_unimodular(A: Sequence[Sequence[int]]) -> bool:
    return abs(integer_det(A)) == 1


def smith_normal_form(A: Sequence[Sequence[int]]) -> tuple[list, list, list]:
    """Return ``(U, S, V)`` with ``U·A·V = S`` diagonal, ``s_i | s_{i+1}``, ``U``, ``V`` unimodular."""
    m = len(A)
    n = _check_rectangular(A) if m else 0
    S = [[int(x) for x in row] for row in A]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, f):
        S[dst] = [a - f * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a - f * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, f):
        for row in S:
            row[dst] -= f * row[src]
        for row in V:
            row[dst] -= f * row[src]

    for t in range(min(m, n)):
        while True:
            nonzero = [(abs(S[i][j]), i, j) for i in range(t, m) for j in range(t, n) if S[i][j] != 0]
            if not nonzero:
                break
            _, i, j = min(nonzero)
            swap_rows(t, i)
            swap_cols(t, j)
            p = S[t][t]
            for i in range(t + 1, m):
                if S[i][t]:
                    add_row(t, i, S[i][t] // p)
            for j in range(t + 1, n):
                if S[t][j]:
                    add_col(t, j, S[t][j] // p)
            if any(S[i][t] for i in range(t + 1, m)) or any(S[t][j] for j in range(t + 1, n)):
                continue
            # divisibility chain: fold an offending row into row t and reduce again
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if S[i][j] % p), None)
            if bad is None:
                break
            add_row(bad, t, -1)
        if S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            U[t] = [-x for x in U[t]]
    assert mat_mul(mat_mul(U, A), V) == S if m and n else True
    return U, S, V


def invariant_factors(A: Sequence[Sequence[int]]) -> tuple:
    _, S, _ = smith_normal_form(A)
    return tuple(S[i][i] for i in range(min(len(S), len(S[0]) if S else 0)) if S[i][i] != 0)


def hermite_normal_form(A: Sequence[Sequence[int]]) -> list:
    """Row-style Hermite normal form of an integer matrix (upper triangular, positive pivots)."""
    H = [[int(x) for x in row] for row in A]
    m = len(H)
    n = _check_rectangular(H) if m else 0
    r = 0
    for c in range(n):
        rows = [i for i in range(r, m) if H[i][c] != 0]
        if not rows:
            continue
        while len([i for i in range(r, m) if H[i][c] != 0]) > 1 or H[r][c] == 0:
            rows = [i for i in range(r, m) if H[i][c] != 0]
            p = min(rows, key=lambda i: abs(H[i][c]))
            H[r], H[p] = H[p], H[r]
            for i in range(r + 1, m):
                if H[i][c] != 0:
                    q = H[i][c] // H[r][c]
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
        if H[r][c] < 0:
            H[r] = [-x for x in H[r]]
        for i in range(r):
            q = H[i][c] // H[r][c]
            H[i] = [a - q * b for a, b in zip(H[i], H[r])]
        r += 1
        if r == m:
            break
    return H


def lattice_index(generators: Sequence[Sequence[int]]) -> int:
    """Index of the sublattice spanned by ``generators`` inside the lattice of its rank.

    Returns 0 when the generators do not span a full-rank sublattice of the
    ambient lattice.
    """
    if not generators:
        return 0
    factors = invariant_factors(generators)
    if len(factors) < len(generators[0]):
        return 0
    return math.prod(factors)
