"""Exact polyhedral engine.

H/V conversion by the double description method (integer arithmetic on
homogenized cones), a rational simplex with Bland's rule, lattice point
enumeration and Hilbert bases of pointed cones.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import PreconditionError, UsageError
from .exact_linear import (
    dot,
    format_rational,
    integer_direction,
    lcm_of_denominators,
    parse_rational,
    rank,
    smith_normal_form,
    solve_rational,
    Solution,
    to_fractions,
)


# ---------------------------------------------------------------------------
# double description core


def _idot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _prim(v) -> tuple:
    g = 0
    for x in v:
        g = math.gcd(g, x)
    return tuple(x // g for x in v) if g > 1 else tuple(v)


def _integer_row(row) -> tuple:
    row = to_fractions(row)
    scale = lcm_of_denominators(row)
    return tuple(int(x * scale) for x in row)


def cone_generators(rows: Sequence[Sequence], d: int) -> tuple[list, list]:
    """Extreme rays and a lineality basis of ``{y : <row, y> >= 0 for all rows}``.

    Rows may be rational; they are scaled to integers since only their sign
    pattern matters. Rays come back as primitive integer tuples, each extreme
    ray exactly once (modulo the lineality space). Adjacency uses the
    combinatorial zero-set test.
    """
    int_rows = [_integer_row(r) for r in rows]
    for r in int_rows:
        if len(r) != d:
            raise UsageError(f"constraint of length {len(r)} in dimension {d}")
    lines = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    rays: list[tuple] = []
    zeros: list[frozenset] = []
    for idx, a in enumerate(int_rows):
        pivot_pos = next((k for k, l in enumerate(lines) if _idot(a, l) != 0), None)
        if pivot_pos is not None:
            piv = lines[pivot_pos]
            al = _idot(a, piv)
            sgn = 1 if al > 0 else -1
            new_lines = []
            for k, l in enumerate(lines):
                if k == pivot_pos:
                    continue
                v = tuple(al * x - _idot(a, l) * y for x, y in zip(l, piv))
                new_lines.append(_prim(v))
            new_rays = []
            for r in rays:
                v = tuple(abs(al) * x - sgn * _idot(a, r) * y for x, y in zip(r, piv))
                new_rays.append(_prim(v))
            lines = new_lines
            rays = new_rays + [tuple(sgn * x for x in piv)]
            zeros = [z | {idx} for z in zeros] + [frozenset(range(idx))]
            continue
        vals = [_idot(a, r) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zer = [k for k, v in enumerate(vals) if v == 0]
        out_rays = [rays[k] for k in pos] + [rays[k] for k in zer]
        out_zeros = [zeros[k] for k in pos] + [zeros[k] | {idx} for k in zer]
        for p in pos:
            for q in neg:
                common = zeros[p] & zeros[q]
                adjacent = True
                for k in range(len(rays)):
                    if k != p and k != q and common <= zeros[k]:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                v = tuple(vals[p] * x - vals[q] * y for x, y in zip(rays[q], rays[p]))
                out_rays.append(_prim(v))
                out_zeros.append(common | {idx})
        rays, zeros = out_rays, out_zeros
    return rays, lines


# ---------------------------------------------------------------------------
# representations


def _canonical_inequality(normal, rhs) -> tuple[tuple, Fraction]:
    normal = to_fractions(normal)
    rhs = Fraction(rhs)
    scale = lcm_of_denominators(normal)
    ints = [int(x * scale) for x in normal]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        raise UsageError("inequality with zero normal")
    return tuple(Fraction(x, g) for x in ints), rhs * scale / g


@dataclass(frozen=True)
class HPolyhedron:
    """The set ``{x : <normal_i, x> >= rhs_i for all i}``."""

    dim: int
    normals: tuple
    rhs: tuple

    def __post_init__(self):
        normals = tuple(to_fractions(a) for a in self.normals)
        rhs = to_fractions(self.rhs)
        if len(normals) != len(rhs):
            raise UsageError("normals and right-hand sides differ in number")
        for a in normals:
            if len(a) != self.dim:
                raise UsageError(f"normal {a} does not live in dimension {self.dim}")
            if not any(a):
                raise UsageError("inequality with zero normal")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "rhs", rhs)

    @classmethod
    def from_constraints(cls, dim: int, constraints: Iterable[tuple]) -> "HPolyhedron":
        constraints = list(constraints)
        return cls(dim, tuple(a for a, _ in constraints), tuple(b for _, b in constraints))

    @property
    def constraints(self) -> list:
        return list(zip(self.normals, self.rhs))

    def contains(self, x: Sequence) -> bool:
        x = to_fractions(x)
        return all(dot(a, x) >= b for a, b in zip(self.normals, self.rhs))

    def slacks(self, x: Sequence) -> tuple:
        x = to_fractions(x)
        return tuple(dot(a, x) - b for a, b in zip(self.normals, self.rhs))

    def intersect(self, other: "HPolyhedron") -> "HPolyhedron":
        if other.dim != self.dim:
            raise UsageError("intersection of polyhedra in different dimensions")
        return HPolyhedron(self.dim, self.normals + other.normals, self.rhs + other.rhs)

    def scaled(self, factor) -> "HPolyhedron":
        """Dilation ``factor * P`` (for factor >= 0)."""
        return HPolyhedron(self.dim, self.normals, tuple(Fraction(factor) * b for b in self.rhs))

    def canonical(self) -> "HPolyhedron":
        seen = {}
        for a, b in self.constraints:
            a, b = _canonical_inequality(a, b)
            seen[(a, b)] = None
        items = sorted(seen)
        return HPolyhedron(self.dim, tuple(a for a, _ in items), tuple(b for _, b in items))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "inequalities": [
                {"normal": [format_rational(x) for x in a], "rhs": format_rational(b)}
                for a, b in self.constraints
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HPolyhedron":
        try:
            dim = int(data["dim"])
            ineqs = data["inequalities"]
            normals = tuple(tuple(parse_rational(x) for x in c["normal"]) for c in ineqs)
            rhs = tuple(parse_rational(c["rhs"]) for c in ineqs)
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed polyhedron JSON: {exc}") from exc
        return cls(dim, normals, rhs)


def _canonical_line(v) -> tuple:
    v = integer_direction(v)
    first = next(x for x in v if x != 0)
    return tuple(-x for x in v) if first < 0 else v


@dataclass(frozen=True)
class VPolyhedron:
    """``conv(vertices) + cone(rays) + lin(lines)``; canonical on construction.

    Vertices are sorted lexicographically and deduplicated, rays are primitive
    integer vectors, sorted. Redundant generators are only removed by
    :func:`dual_description` round trips, not here.
    """

    dim: int
    vertices: tuple
    rays: tuple = ()
    lines: tuple = ()

    def __post_init__(self):
        verts = sorted(set(to_fractions(v) for v in self.vertices))
        rays = sorted(set(integer_direction(r) for r in self.rays if any(r)))
        lines = sorted(set(_canonical_line(l) for l in self.lines if any(l)))
        for v in itertools.chain(verts, rays, lines):
            if len(v) != self.dim:
                raise UsageError(f"generator {v} does not live in dimension {self.dim}")
        object.__setattr__(self, "vertices", tuple(verts))
        object.__setattr__(self, "rays", tuple(rays))
        object.__setattr__(self, "lines", tuple(lines))

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def is_bounded(self) -> bool:
        return not self.rays and not self.lines

    def to_dict(self) -> dict:
        out = {
            "dim": self.dim,
            "vertices": [[format_rational(x) for x in v] for v in self.vertices],
            "rays": [[format_rational(x) for x in r] for r in self.rays],
        }
        if self.lines:
            out["lines"] = [[format_rational(x) for x in l] for l in self.lines]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "VPolyhedron":
        try:
            verts = [tuple(parse_rational(x) for x in v) for v in data["vertices"]]
            rays = [tuple(parse_rational(x) for x in r) for r in data.get("rays", [])]
            lines = [tuple(parse_rational(x) for x in r) for r in data.get("lines", [])]
            dim = int(data["dim"]) if "dim" in data else len((verts or rays)[0])
        except (KeyError, TypeError, IndexError) as exc:
            raise UsageError(f"malformed polyhedron JSON: {exc}") from exc
        return cls(dim, tuple(verts), tuple(rays), tuple(lines))


def _infeasible_h(dim: int) -> HPolyhedron:
    e = tuple(Fraction(int(i == 0)) for i in range(dim))
    return HPolyhedron(dim, (e, tuple(-x for x in e)), (Fraction(1), Fraction(0)))


def h_to_v(p: HPolyhedron) -> VPolyhedron:
    d = p.dim
    rows = [(Fraction(1),) + (Fraction(0),) * d]
    for a, b in sorted(p.constraints):
        rows.append((-b,) + tuple(a))
    rays, lines = cone_generators(rows, d + 1)
    vertices, recession = [], []
    for r in rays:
        if r[0] > 0:
            vertices.append(tuple(Fraction(x, r[0]) for x in r[1:]))
        else:
            recession.append(r[1:])
    if not vertices:
        return VPolyhedron(d, ())
    assert all(l[0] == 0 for l in lines)
    return VPolyhedron(d, tuple(vertices), tuple(recession), tuple(l[1:] for l in lines))


def v_to_h(v: VPolyhedron) -> HPolyhedron:
    d = v.dim
    if v.is_empty:
        return _infeasible_h(d)
    rows = [(Fraction(1),) + tuple(x) for x in v.vertices]
    rows += [(Fraction(0),) + tuple(Fraction(x) for x in r) for r in v.rays]
    for l in v.lines:
        rows.append((Fraction(0),) + tuple(Fraction(x) for x in l))
        rows.append((Fraction(0),) + tuple(Fraction(-x) for x in l))
    rays, lines = cone_generators(rows, d + 1)
    constraints = []
    for h in rays:
        if any(h[1:]):
            constraints.append((h[1:], Fraction(-h[0])))
    for h in lines:
        constraints.append((h[1:], Fraction(-h[0])))
        constraints.append((tuple(-x for x in h[1:]), Fraction(h[0])))
    if not constraints:
        return HPolyhedron(d, (), ())
    return HPolyhedron.from_constraints(d, constraints).canonical()


def dual_description(p: Union[HPolyhedron, VPolyhedron]):
    """Convert between H- and V-representations (either direction)."""
    if isinstance(p, HPolyhedron):
        return h_to_v(p)
    if isinstance(p, VPolyhedron):
        return v_to_h(p)
    raise UsageError(f"not a polyhedron: {type(p).__name__}")


def convex_hull(points: Sequence[Sequence], rays: Sequence[Sequence] = ()) -> VPolyhedron:
    """Irredundant V-representation of ``conv(points) + cone(rays)``."""
    points = [to_fractions(p) for p in points]
    if not points:
        raise UsageError("convex hull of no points")
    d = len(points[0])
    return h_to_v(v_to_h(VPolyhedron(d, tuple(points), tuple(rays))))


def polar_dual(p: VPolyhedron) -> VPolyhedron:
    """``{u : <m, u> >= -1 for all m in p}`` for a polytope with 0 in its interior."""
    if not p.is_bounded:
        raise PreconditionError("polar_dual needs a bounded polytope")
    h = v_to_h(p)
    # equalities come back as opposite pairs; any of them means not full-dimensional
    pairs = set(h.constraints)
    for a, b in h.constraints:
        if (tuple(-x for x in a), -b) in pairs:
            raise PreconditionError(f"polytope is not full-dimensional (lies in <{a}, x> = {b})")
    verts = []
    for a, b in h.constraints:
        if b >= 0:
            raise PreconditionError(
                f"origin is not in the interior: facet with normal {tuple(map(str, a))} passes at level {b}"
            )
        verts.append(tuple(x / -b for x in a))
    return VPolyhedron(p.dim, tuple(verts))


# ---------------------------------------------------------------------------
# linear programming


@dataclass(frozen=True)
class Optimal:
    value: Fraction
    point: tuple
    dual: tuple = ()


@dataclass(frozen=True)
class Unbounded:
    direction: tuple
    point: tuple = ()


@dataclass(frozen=True)
class Infeasible:
    certificate: tuple


LpOutcome = Union[Optimal, Unbounded, Infeasible]


def _simplex(A: list, b: list, cost: list):
    """min cost·z subject to A z = b, z >= 0, Bland's rule, two phases.

    Returns ``(status, z, pi, extra)``: status ``"optimal"`` with simplex
    multipliers ``pi`` (so ``cost - pi·A >= 0``); ``"infeasible"`` with a
    Farkas vector in ``extra`` (``extra·A <= 0`` and ``extra·b > 0``);
    ``"unbounded"`` with a ray ``extra`` (``A·extra = 0``, ``extra >= 0``,
    ``cost·extra < 0``).
    """
    m, N = len(A), len(cost)
    signs = [1 if b[i] >= 0 else -1 for i in range(m)]
    T = [
        [Fraction(signs[i] * A[i][j]) for j in range(N)]
        + [Fraction(int(i == k)) for k in range(m)]
        + [Fraction(signs[i] * b[i])]
        for i in range(m)
    ]
    basis = [N + i for i in range(m)]
    width = N + m

    def pivot(r, c):
        inv = 1 / T[r][c]
        T[r] = [x * inv for x in T[r]]
        for i in range(m):
            if i != r and T[i][c] != 0:
                f = T[i][c]
                T[i] = [x - f * y for x, y in zip(T[i], T[r])]
        basis[r] = c

    def run(costs, allowed):
        while True:
            cb = [costs[j] for j in basis]
            entering = None
            for j in allowed:
                if j in basis:
                    continue
                red = costs[j] - sum(cb[i] * T[i][j] for i in range(m))
                if red < 0:
                    entering = j
                    break
            if entering is None:
                return None
            best = None
            for i in range(m):
                if T[i][entering] > 0:
                    ratio = T[i][width] / T[i][entering]
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return entering
            pivot(best[1], entering)

    def multipliers(costs):
        cb = [costs[j] for j in basis]
        return [sum(cb[i] * T[i][N + k] for i in range(m)) for k in range(m)]

    phase1 = [Fraction(0)] * N + [Fraction(1)] * m
    run(phase1, range(width))
    value1 = sum(T[i][width] for i in range(m) if basis[i] >= N)
    if value1 > 0:
        pi = multipliers(phase1)
        return "infeasible", None, None, [signs[k] * pi[k] for k in range(m)]
    for i in range(m):
        if basis[i] >= N:
            j = next((j for j in range(N) if T[i][j] != 0 and j not in basis), None)
            if j is not None:
                pivot(i, j)
    costs = [Fraction(c) for c in cost] + [Fraction(0)] * m
    entering = run(costs, range(N))
    z = [Fraction(0)] * N
    for i in range(m):
        if basis[i] < N:
            z[basis[i]] = T[i][width]
    if entering is not None:
        ray = [Fraction(0)] * N
        ray[entering] = Fraction(1)
        for i in range(m):
            if basis[i] < N:
                ray[basis[i]] = -T[i][entering]
        return "unbounded", z, None, ray
    pi = multipliers(costs)
    return "optimal", z, [signs[k] * pi[k] for k in range(m)], None


def lp_minimize(objective: Sequence, region: HPolyhedron) -> LpOutcome:
    """Minimize ``<objective, x>`` over ``region`` exactly.

    The simplex runs on the dual standard-form program
    ``max b·y s.t. A^T y = c, y >= 0`` whose row count is the ambient
    dimension; primal points are read off the simplex multipliers. Every
    outcome carries a certificate that is re-checked before returning.
    """
    c = to_fractions(objective)
    n = region.dim
    if len(c) != n:
        raise UsageError(f"objective of length {len(c)} for a polyhedron in dimension {n}")
    A = [list(a) for a in region.normals]
    b = list(region.rhs)
    m = len(A)
    At = [[A[i][j] for i in range(m)] for j in range(n)]
    status, y, pi, extra = _simplex(At, list(c), [-x for x in b])
    if status == "optimal":
        x = tuple(-p for p in pi)
        value = dot(c, x)
        y = tuple(y)
        assert region.contains(x), "LP point infeasible"
        assert all(v >= 0 for v in y) and all(dot(col, y) == cj for col, cj in zip(At, c))
        assert dot(b, y) == value, "LP duality gap"
        return Optimal(value, x, y)
    if status == "unbounded":
        cert = tuple(extra)
        assert all(v >= 0 for v in cert) and dot(b, cert) > 0
        assert all(dot(col, cert) == 0 for col in At)
        return Infeasible(cert)
    direction = tuple(-w for w in extra)
    assert dot(c, direction) < 0
    assert all(dot(a, direction) >= 0 for a in A)
    fstatus, _, fpi, fextra = _simplex(At, [Fraction(0)] * n, [-x for x in b])
    if fstatus == "unbounded":
        cert = tuple(fextra)
        assert all(v >= 0 for v in cert) and dot(b, cert) > 0
        return Infeasible(cert)
    point = tuple(-p for p in fpi)
    assert region.contains(point)
    return Unbounded(direction, point)


def lp_maximize(objective: Sequence, region: HPolyhedron) -> LpOutcome:
    out = lp_minimize(tuple(-Fraction(x) for x in objective), region)
    if isinstance(out, Optimal):
        return Optimal(-out.value, out.point, out.dual)
    return out


def is_feasible(region: HPolyhedron) -> bool:
    return not isinstance(lp_minimize((0,) * region.dim, region), Infeasible)


# ---------------------------------------------------------------------------
# lattice points


def _integer_system(p: HPolyhedron) -> tuple[list, list]:
    """Scale each constraint to integer normal; integer x satisfy <a,x> >= ceil(rhs)."""
    A, r = [], []
    for a, b in p.constraints:
        scale = lcm_of_denominators(a)
        ai = [int(x * scale) for x in a]
        bi = Fraction(b) * scale
        A.append(ai)
        r.append(-((-bi.numerator) // bi.denominator))
    return A, r


def rational_bounding_box(p: HPolyhedron) -> Optional[tuple[list, list]]:
    """Exact coordinate ranges ``[lo, hi]`` of a bounded polyhedron; None when infeasible."""
    lo, hi = [], []
    for i in range(p.dim):
        e = tuple(int(i == j) for j in range(p.dim))
        low = lp_minimize(e, p)
        if isinstance(low, Infeasible):
            return None
        high = lp_maximize(e, p)
        if isinstance(low, Unbounded) or isinstance(high, Unbounded):
            raise PreconditionError(f"polyhedron is unbounded along coordinate {i}")
        lo.append(low.value)
        hi.append(high.value)
    return lo, hi


def bounding_box(p: HPolyhedron) -> Optional[tuple[list, list]]:
    """Integer box ``[lo, hi]`` containing the lattice points of ``p``; None when infeasible."""
    box = rational_bounding_box(p)
    if box is None:
        return None
    return [math.ceil(x) for x in box[0]], [math.floor(x) for x in box[1]]


def _scan(A: list, r: list, lo: list, hi: list, count_only: bool):
    n = len(lo)
    if any(h < l for l, h in zip(lo, hi)):
        return 0 if count_only else []
    bound = max([abs(x) for row in A for x in row] + [1]) * (max([abs(x) for x in lo + hi] + [1]) + 1) * (n + 1)
    bound += max([abs(x) for x in r] + [0])
    dtype = np.int64 if bound < 2**60 else object
    Am = np.array(A, dtype=dtype).reshape(len(A), n)
    rv = np.array(r, dtype=dtype)
    last = Am[:, n - 1]
    head = Am[:, : n - 1]
    total = 0
    found = []
    first_range = range(lo[0], hi[0] + 1) if n > 1 else [None]
    for x0 in first_range:
        if n > 1:
            axes = [np.array([x0], dtype=dtype)] + [np.arange(lo[i], hi[i] + 1, dtype=dtype) for i in range(1, n - 1)]
            grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
            partial = grid @ head.T
        else:
            grid = np.zeros((1, 0), dtype=dtype)
            partial = np.zeros((1, len(A)), dtype=dtype)
        need = rv[None, :] - partial
        low = np.full(grid.shape[0], lo[n - 1], dtype=dtype)
        high = np.full(grid.shape[0], hi[n - 1], dtype=dtype)
        ok = np.ones(grid.shape[0], dtype=bool)
        for k in range(len(A)):
            a = last[k]
            if a > 0:
                low = np.maximum(low, -((-need[:, k]) // a))
            elif a < 0:
                high = np.minimum(high, need[:, k] // a)
            else:
                ok &= need[:, k] <= 0
        cnt = np.where(ok, np.maximum(high - low + 1, 0), 0)
        if count_only:
            total += int(cnt.sum())
        else:
            for idx in np.nonzero(cnt > 0)[0]:
                prefix = tuple(int(x) for x in grid[idx])
                for z in range(int(low[idx]), int(high[idx]) + 1):
                    found.append(prefix + (z,))
    return total if count_only else found


def lattice_points(p: HPolyhedron) -> list:
    """All integer points of a bounded polyhedron, sorted lexicographically."""
    box = bounding_box(p)
    if box is None:
        return []
    A, r = _integer_system(p)
    return _scan(A, r, box[0], box[1], count_only=False)


def count_lattice_points(p: HPolyhedron, box: Optional[tuple[list, list]] = None) -> int:
    if box is None:
        box = bounding_box(p)
        if box is None:
            return 0
    A, r = _integer_system(p)
    return _scan(A, r, box[0], box[1], count_only=True)


# ---------------------------------------------------------------------------
# pointed cones, triangulation, Hilbert bases


@dataclass(frozen=True)
class PointedCone:
    """A pointed rational cone: primitive extreme rays plus facets.

    ``facets`` holds pairs ``(normal, ray_indices)`` with ``<normal, x> >= 0``
    on the cone and equality exactly on the listed rays. ``equations`` is a
    basis of linear forms vanishing on the cone (empty when full-dimensional).
    """

    dim: int
    rays: tuple
    facets: tuple
    equations: tuple = ()

    @classmethod
    def from_generators(cls, generators: Sequence[Sequence]) -> "PointedCone":
        gens = [integer_direction(g) for g in generators if any(g)]
        if not gens:
            raise PreconditionError("cone with no nonzero generators")
        d = len(gens[0])
        normals, eqs = cone_generators(gens, d)
        rays = [g for g in sorted(set(gens)) if _is_extreme(g, gens, normals, eqs)]
        return cls._build(d, rays, normals, eqs)

    @classmethod
    def from_inequalities(cls, normals: Sequence[Sequence], dim: int) -> "PointedCone":
        rays, lines = cone_generators(normals, dim)
        if lines:
            raise PreconditionError("cone contains a line (not pointed)")
        if not rays:
            raise PreconditionError("cone is the origin only")
        return cls.from_generators(rays)

    @classmethod
    def _build(cls, d, rays, normals, eqs):
        if rank([list(r) for r in rays]) + 0 < 1:
            raise PreconditionError("cone is the origin only")
        # pointedness: the facet normals and equations must span the dual space
        if rank([list(x) for x in list(normals) + list(eqs)] or [[0] * d]) < d:
            raise PreconditionError("cone contains a line (not pointed)")
        facets = []
        for h in sorted(normals):
            tight = frozenset(i for i, r in enumerate(rays) if _idot(h, r) == 0)
            facets.append((h, tight))
        return cls(d, tuple(rays), tuple(facets), tuple(eqs))

    @property
    def is_full_dimensional(self) -> bool:
        return not self.equations

    @property
    def cone_dim(self) -> int:
        return self.dim - len(self.equations)

    def contains(self, x: Sequence) -> bool:
        x = to_fractions(x)
        return all(dot(h, x) >= 0 for h, _ in self.facets) and all(dot(e, x) == 0 for e in self.equations)

    def contains_interior(self, x: Sequence) -> bool:
        x = to_fractions(x)
        return all(dot(h, x) > 0 for h, _ in self.facets) and all(dot(e, x) == 0 for e in self.equations)

    def face_closure(self, ray_indices: Iterable[int]) -> frozenset:
        """Rays of the smallest face containing the given rays."""
        s = frozenset(ray_indices)
        out = frozenset(range(len(self.rays)))
        for _, tight in self.facets:
            if s <= tight:
                out &= tight
        return out

    def inequalities(self) -> HPolyhedron:
        cons = [(h, 0) for h, _ in self.facets]
        for e in self.equations:
            cons.append((e, 0))
            cons.append((tuple(-x for x in e), 0))
        return HPolyhedron.from_constraints(self.dim, cons)


def _is_extreme(g, gens, normals, eqs) -> bool:
    tight = [h for h in normals if _idot(h, g) == 0]
    # g is extreme iff the tight facets cut the cone down to the ray through g
    others = [list(h) for h in tight] + [list(e) for e in eqs]
    return rank(others or [[0] * len(g)]) == len(g) - 1


def triangulate(cone: PointedCone) -> list:
    """Pulling triangulation of ``cone`` using only its extreme rays.

    Returns sorted ray-index tuples, each spanning a simplicial cone of the
    same dimension as ``cone``.
    """
    vecs = [list(r) for r in cone.rays]

    def dim_of(idx):
        return rank([vecs[i] for i in idx]) if idx else 0

    def facets_of(face, d):
        cands = set()
        for _, tight in cone.facets:
            sub = frozenset(face) & tight
            if sub != frozenset(face) and dim_of(sorted(sub)) == d - 1:
                cands.add(sub)
        return [c for c in cands if not any(c < o for o in cands)]

    def rec(face, d):
        face = sorted(face)
        if len(face) == d:
            return [tuple(face)]
        v = face[0]
        out = []
        for f in sorted(facets_of(face, d), key=sorted):
            if v in f:
                continue
            for simplex in rec(f, d - 1):
                out.append(tuple(sorted((v,) + simplex)))
        return out

    return sorted(set(rec(range(len(cone.rays)), cone.cone_dim)))


def _inverse(M: list) -> list:
    n = len(M)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        sol = solve_rational(M, e)
        assert isinstance(sol, Solution) and not sol.kernel
        cols.append(sol.x)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def parallelepiped_points(generators: Sequence[Sequence[int]]) -> list:
    """Lattice points ``sum(l_i g_i)`` with ``0 <= l_i < 1`` for linearly independent integer ``g_i``.

    The generators must form a square nonsingular matrix. Coset
    representatives of the quotient lattice come from the Smith form.
    """
    G = [[int(x) for x in g] for g in generators]
    n = len(G)
    U, S, V = smith_normal_form(G)
    diag = [S[i][i] for i in range(n)]
    if any(s == 0 for s in diag):
        raise PreconditionError("generators are linearly dependent")
    Vinv = _inverse([[Fraction(x) for x in row] for row in V])
    Ginv = _inverse([[Fraction(x) for x in row] for row in G])
    points = set()
    for e in itertools.product(*[range(s) for s in diag]):
        x = [sum(e[k] * Vinv[k][j] for k in range(n)) for j in range(n)]
        lam = [sum(x[k] * Ginv[k][j] for k in range(n)) for j in range(n)]
        frac = [l - math.floor(l) for l in lam]
        pt = tuple(int(sum(frac[k] * G[k][j] for k in range(n))) for j in range(n))
        points.add(pt)
    assert len(points) == math.prod(diag)
    return sorted(points)


def hilbert_basis(cone: Union[PointedCone, Sequence[Sequence[int]]]) -> list:
    """Minimal generating set of the semigroup ``cone ∩ Z^n``.

    Candidates are the extreme rays plus the fundamental-parallelepiped points
    of each simplex of a triangulation; an element is dropped when subtracting
    another candidate stays inside the cone.
    """
    if not isinstance(cone, PointedCone):
        cone = PointedCone.from_generators(cone)
    if not cone.is_full_dimensional:
        raise PreconditionError("hilbert_basis needs a full-dimensional cone")
    cands = set(cone.rays)
    for simplex in triangulate(cone):
        cands.update(parallelepiped_points([cone.rays[i] for i in simplex]))
    cands.discard((0,) * cone.dim)
    normals = [h for h, _ in cone.facets]

    def inside(x):
        return all(_idot(h, x) >= 0 for h in normals)

    basis = []
    for g in sorted(cands):
        if not any(h != g and inside(tuple(a - b for a, b in zip(g, h))) for h in cands):
            basis.append(g)
    return basis
