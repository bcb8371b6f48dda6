"""Quasi-nef divisors: Q-Cartierizing small refinements, wall crossings and thresholds."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .divisor import (
    CartierStatus,
    GlobalGeneration,
    NotQCartier,
    Cartier,
    ToricDivisor,
    cartier_status,
    is_globally_generated,
    local_polyhedron,
    polytope_PD,
    rational_cartier_data,
)
from .errors import InternalInconsistencyError, PreconditionError, UsageError
from .exact_linear import Solution, dot, format_rational, rank, solve_rational
from .fan import Fan, cones_of_f2_inside_f, is_refinement_small, refine_by_polytope, require_complete, require_valid
from .polyhedra import VPolyhedron, convex_hull, h_to_v, v_to_h


def _require_positive(d: ToricDivisor) -> None:
    bad = [i for i, c in enumerate(d.coeffs) if c <= 0]
    if bad:
        raise PreconditionError(f"coefficients must be positive; rays {bad} violate this")


def qd_polytope(d: ToricDivisor) -> VPolyhedron:
    """``conv{u_rho / d_rho}`` for a divisor with positive coefficients."""
    _require_positive(d)
    pts = [tuple(Fraction(x) / c for x in u) for u, c in zip(d.fan.rays, d.coeffs)]
    q = convex_hull(pts)
    if rank([[a - b for a, b in zip(v, q.vertices[0])] for v in q.vertices[1:]] or [[0] * d.fan.dim]) < d.fan.dim:
        raise PreconditionError("the hull of u_rho/d_rho is not full-dimensional")
    return q


def qd_facet_data(d: ToricDivisor) -> list:
    """For each facet ``<a,x> >= b`` of ``Q_D`` the point ``a/(-b)`` that evaluates to -1 on it."""
    h = v_to_h(qd_polytope(d))
    out = []
    for a, b in h.constraints:
        if b >= 0:
            raise InternalInconsistencyError("origin is not interior to Q_D")
        out.append(tuple(x / -b for x in a))
    return sorted(out)


# ---------------------------------------------------------------------------
# wall crossings


@dataclass(frozen=True)
class WallCrossing:
    wall: tuple  # sorted ray indices spanning the common facet
    cones: tuple  # (i, j)
    m: tuple  # data on cone i
    m_prime: tuple  # data on cone j
    test_ray: int  # a ray of cone j off the wall
    value: Fraction  # <m,u> - <m',u>
    extracted: bool = False

    def to_dict(self) -> dict:
        return {
            "wall": list(self.wall),
            "cones": list(self.cones),
            "m": [format_rational(x) for x in self.m],
            "m_prime": [format_rational(x) for x in self.m_prime],
            "test_ray": self.test_ray,
            "value": format_rational(self.value),
            "extracted": self.extracted,
        }


def wall_crossings(d: ToricDivisor, source: Optional[Fan] = None) -> list:
    """Intersection numbers of a Q-Cartier divisor with the curves of all walls.

    With ``source`` given (a fan that ``d.fan`` refines), walls cutting through
    the interior of a source cone are flagged as extracted.
    """
    f = d.fan
    data = rational_cartier_data(d)
    homes = cones_of_f2_inside_f(source, f) if source is not None else None
    out = []
    for tight, i, j in f.walls():
        u_idx = min(set(f.max_cones[j]) - tight)
        u = f.rays[u_idx]
        value = dot(data[i], u) - dot(data[j], u)
        extracted = False
        if homes is not None and homes[i] == homes[j] and homes[i] is not None:
            home = source.cone(homes[i])
            wall_vecs = [f.rays[t] for t in tight]
            extracted = not any(all(dot(h, w) == 0 for w in wall_vecs) for h, _ in home.geometry.facets)
        out.append(WallCrossing(tuple(sorted(tight)), (i, j), data[i], data[j], u_idx, value, extracted))
    return out


def is_nef_qcartier(d: ToricDivisor) -> bool:
    """Every wall crossing of a Q-Cartier divisor on a complete fan is nonnegative."""
    require_complete(d.fan)
    if isinstance(cartier_status(d), NotQCartier):
        raise PreconditionError("is_nef_qcartier needs a Q-Cartier divisor")
    return all(w.value >= 0 for w in wall_crossings(d))


def _failing_ample_wall(d: ToricDivisor) -> Optional[WallCrossing]:
    for w in wall_crossings(d):
        if w.value <= 0:
            return w
    return None


def require_ample(a: ToricDivisor, cartier: bool = False) -> None:
    require_complete(a.fan)
    status = cartier_status(a)
    if isinstance(status, NotQCartier):
        raise PreconditionError(f"ample divisor must be Q-Cartier; cone {status.cone} has no local data")
    if cartier and not isinstance(status, Cartier):
        raise PreconditionError(f"ample divisor must be Cartier; its Q-Cartier index is {status.index}")
    w = _failing_ample_wall(a)
    if w is not None:
        raise PreconditionError(f"divisor is not ample: wall {list(w.wall)} has crossing value {w.value}")


# ---------------------------------------------------------------------------
# Q-Cartierization


@dataclass(frozen=True)
class QCartierization:
    source: Fan
    fan_prime: Fan
    dbar: ToricDivisor
    status: CartierStatus
    small: bool
    walls: tuple
    construction: str

    @property
    def extracted_walls(self) -> list:
        return [w for w in self.walls if w.extracted]

    @property
    def relatively_ample(self) -> bool:
        return all(w.value > 0 for w in self.extracted_walls)

    @property
    def cartier_data(self) -> tuple:
        return self.status.rational_data

    def to_dict(self) -> dict:
        st = self.status
        status = {"kind": type(st).__name__, "index": st.index, "data": [[format_rational(x) for x in m] for m in st.data]}
        return {
            "construction": self.construction,
            "fan_prime": self.fan_prime.to_dict(),
            "small": self.small,
            "dbar_status": status,
            "relatively_ample": self.relatively_ample,
            "walls": [w.to_dict() for w in self.walls],
        }


def _relative_refinement(d: ToricDivisor) -> Fan:
    # normal fan of each local polyhedron: one cell per vertex, spanned by its tight rays
    f = d.fan
    cells = set()
    for k, idx in enumerate(f.max_cones):
        for v in h_to_v(local_polyhedron(d, k)).vertices:
            cells.add(tuple(sorted(i for i in idx if dot(v, f.rays[i]) == -d.coeffs[i])))
    return Fan(f.dim, f.rays, tuple(sorted(cells)))


def qcartierize(d: ToricDivisor, construction: str = "polar") -> QCartierization:
    """Small refinement on which the strict transform of ``d`` is Q-Cartier.

    ``polar`` refines by the face fan of ``conv{u_rho/d_rho}``; ``relative``
    subdivides each cone by the normal fan of its local polyhedron.
    """
    f = d.fan
    require_complete(f)
    _require_positive(d)
    if construction == "polar":
        f2 = refine_by_polytope(f, qd_polytope(d))
    elif construction == "relative":
        f2 = _relative_refinement(d)
        require_valid(f2)
    else:
        raise UsageError(f"unknown construction {construction!r}")
    small = is_refinement_small(f, f2)
    if not small:
        extra = sorted(set(f2.rays) - set(f.rays))
        raise InternalInconsistencyError(f"Q-Cartierizing refinement adds rays {extra}; it is not small")
    if f2.rays != f.rays:
        raise InternalInconsistencyError("refinement reordered the rays")
    dbar = ToricDivisor(f2, d.coeffs)
    status = cartier_status(dbar)
    if isinstance(status, NotQCartier):
        raise InternalInconsistencyError(f"strict transform is not Q-Cartier on refined cone {status.cone}")
    walls = tuple(wall_crossings(dbar, source=f))
    return QCartierization(f, f2, dbar, status, small, walls, construction)


# ---------------------------------------------------------------------------
# q-nef test and threshold


@dataclass(frozen=True)
class QnefResult:
    qnef: bool
    witness: Optional[tuple] = None  # (cone, local vertex, ray whose inequality fails)

    def __bool__(self) -> bool:
        return self.qnef


def is_qnef(d: ToricDivisor) -> QnefResult:
    """Every vertex of every local polyhedron lies in ``P_D``."""
    require_complete(d.fan)
    f = d.fan
    for k in range(len(f.max_cones)):
        for v in h_to_v(local_polyhedron(d, k)).vertices:
            for i, (u, c) in enumerate(zip(f.rays, d.coeffs)):
                if dot(v, u) < -c:
                    return QnefResult(False, (k, v, i))
    return QnefResult(True)


@dataclass(frozen=True)
class QnefThreshold:
    value: Fraction
    attained: bool
    breakpoints: tuple  # (cone, basis rays, ray, critical t), sorted by t


def _local_bases(f: Fan, k: int) -> list:
    idx = f.max_cones[k]
    return [tau for tau in itertools.combinations(idx, f.dim) if rank([list(f.rays[i]) for i in tau]) == f.dim]


def qnt(d: ToricDivisor, a: ToricDivisor) -> QnefThreshold:
    """``inf{t : D + tA is q-nef}`` computed exactly.

    Every candidate vertex of a local polyhedron of ``D + tA`` solves ``n``
    independent ray equations, so it moves affinely in ``t``. All membership
    conditions change truth value only where some ray inequality through such
    a point turns tight; the q-nef test is constant between consecutive
    critical values and is evaluated once on each piece.
    """
    if a.fan != d.fan:
        raise UsageError("divisor and ample divisor live on different fans")
    f = d.fan
    require_complete(f)
    require_ample(a)
    affine = []  # (cone, tau, {ray: (alpha, beta)}) with slack = alpha + beta t
    table = []
    for k in range(len(f.max_cones)):
        for tau in _local_bases(f, k):
            U = [list(f.rays[i]) for i in tau]
            m0 = solve_rational(U, [-d.coeffs[i] for i in tau])
            m1 = solve_rational(U, [-a.coeffs[i] for i in tau])
            assert isinstance(m0, Solution) and isinstance(m1, Solution)
            lines = {}
            for i, u in enumerate(f.rays):
                alpha = dot(m0.x, u) + d.coeffs[i]
                beta = dot(m1.x, u) + a.coeffs[i]
                lines[i] = (alpha, beta)
                if beta != 0:
                    table.append((k, tau, i, -alpha / beta))
            affine.append((k, tau, lines))

    def good(t):
        for k, tau, lines in affine:
            local = all(lines[i][0] + lines[i][1] * t >= 0 for i in f.max_cones[k])
            if local and any(al + be * t < 0 for al, be in lines.values()):
                return False
        return True

    crit = sorted({row[3] for row in table})
    if not crit:
        raise InternalInconsistencyError("no critical values: q-nef test is constant in t")
    points = [(crit[0] - 1, False)]
    for lo, hi in zip(crit, crit[1:]):
        points += [(lo, True), ((lo + hi) / 2, False)]
    points += [(crit[-1], True), (crit[-1] + 1, False)]
    flags = [good(t) for t, _ in points]
    if flags[0]:
        raise InternalInconsistencyError("D + tA is q-nef for arbitrarily negative t")
    if not flags[-1]:
        raise InternalInconsistencyError("D + tA is not q-nef for large t")
    j = max(i for i, ok in enumerate(flags) if not ok) + 1
    if not all(flags[j:]):
        raise InternalInconsistencyError("q-nef locus in t is not upward closed")
    t_j, is_crit = points[j]
    value, attained = (t_j, True) if is_crit else (points[j - 1][0], False)
    table.sort(key=lambda row: (row[3], row[0], row[1], row[2]))
    result = QnefThreshold(value, attained, tuple(table))
    _verify_threshold(d, a, result)
    return result


def _verify_threshold(d: ToricDivisor, a: ToricDivisor, thr: QnefThreshold) -> None:
    for delta in (Fraction(1, 1000), Fraction(1)):
        if not is_qnef(d + a.scaled(thr.value + delta)):
            raise InternalInconsistencyError(f"D + tA fails the q-nef test at t = qnt + {delta}")
        if is_qnef(d + a.scaled(thr.value - delta)):
            raise InternalInconsistencyError(f"D + tA passes the q-nef test at t = qnt - {delta}")
    if thr.attained != bool(is_qnef(d + a.scaled(thr.value))):
        raise InternalInconsistencyError("q-nef test at the threshold disagrees with the attained flag")


def bisect_threshold(d: ToricDivisor, a: ToricDivisor, lo, hi, steps: int = 40) -> tuple:
    """Shrink ``[lo, hi]`` (``lo`` failing, ``hi`` passing the q-nef test) by rational bisection."""
    lo, hi = Fraction(lo), Fraction(hi)
    if is_qnef(d + a.scaled(lo)) or not is_qnef(d + a.scaled(hi)):
        raise PreconditionError("bisection needs a failing lower end and a passing upper end")
    for _ in range(steps):
        mid = (lo + hi) / 2
        if is_qnef(d + a.scaled(mid)):
            hi = mid
        else:
            lo = mid
    return lo, hi


@dataclass(frozen=True)
class ConjectureReport:
    rows: tuple  # (m, GlobalGeneration of m(D + A))

    @property
    def all_generated(self) -> bool:
        return all(g.generated for _, g in self.rows)


def check_gg_conjecture(d: ToricDivisor, a: ToricDivisor, m_max: int) -> ConjectureReport:
    """Global generation of ``m(D + A)`` for ``m = 1..m_max``."""
    if a.fan != d.fan:
        raise UsageError("divisor and ample divisor live on different fans")
    if not d.is_integral:
        raise PreconditionError("check_gg_conjecture needs an integral divisor")
    require_ample(a, cartier=True)
    rows = []
    for m in range(1, m_max + 1):
        rows.append((m, is_globally_generated((d + a).scaled(m))))
    return ConjectureReport(tuple(rows))
