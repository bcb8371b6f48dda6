"""Asymptotic pullbacks of Weil divisors, relative canonical valuations and MLD searches."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .divisor import NotQCartier, ToricDivisor, anticanonical, canonical, cartier_status, local_generators
from .errors import DomainError, InternalInconsistencyError, PreconditionError, UsageError
from .exact_linear import content, dot, format_rational
from .fan import Fan, locate, require_valid
from .polyhedra import HPolyhedron, Infeasible, Optimal, Unbounded, lp_minimize


def _as_query(u: Sequence, dim: int) -> tuple:
    if len(u) != dim:
        raise UsageError(f"query {tuple(u)} has length {len(u)}, expected {dim}")
    try:
        v = tuple(int(x) for x in u)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"query {u} is not an integer vector") from exc
    if any(Fraction(x) != y for x, y in zip(v, u)):
        raise UsageError(f"query {u} is not an integer vector")
    if not any(v):
        raise DomainError("query vector is zero")
    return v


def _containing_cones(f: Fan, u: tuple) -> list:
    cones = locate(f, u)
    if not cones:
        raise DomainError(f"{u} lies outside the support of the fan")
    return cones


def _local_min(f: Fan, k: int, lower: Sequence, u: tuple) -> Optimal:
    """``min <m,u>`` subject to ``<m,u_rho> >= lower_rho`` over the rays of cone ``k``."""
    idx = f.max_cones[k]
    region = HPolyhedron(f.dim, tuple(f.rays[i] for i in idx), tuple(lower[i] for i in idx))
    out = lp_minimize(u, region)
    if not isinstance(out, Optimal):
        raise InternalInconsistencyError(f"local LP for {u} on cone {k} is {type(out).__name__}")
    return out


@dataclass(frozen=True)
class PullbackEntry:
    query: tuple
    coefficient: Fraction
    optimizer: tuple
    cone: int


@dataclass(frozen=True)
class PullbackResult:
    coeffs: tuple
    entries: tuple

    def to_dict(self) -> dict:
        return {
            "coeffs": [format_rational(c) for c in self.coeffs],
            "entries": [
                {
                    "query": list(e.query),
                    "coefficient": format_rational(e.coefficient),
                    "optimizer": [format_rational(x) for x in e.optimizer],
                    "cone": e.cone,
                }
                for e in self.entries
            ],
        }


def pullback_coefficient(d: ToricDivisor, u: Sequence) -> PullbackEntry:
    """Coefficient along ``u`` of the asymptotic pullback of ``d``.

    This is ``min <m,u>`` over ``{<m,u_rho> >= d_rho}`` for the rays of a cone
    containing ``u``; every containing cone must give the same value.
    """
    f = d.fan
    u = _as_query(u, f.dim)
    cones = _containing_cones(f, u)
    first = None
    for k in cones:
        opt = _local_min(f, k, d.coeffs, u)
        if first is None:
            first = PullbackEntry(u, opt.value, opt.point, k)
        elif opt.value != first.coefficient:
            raise InternalInconsistencyError(
                f"pullback along {u} depends on the cone: {first.coefficient} on cone {first.cone}, {opt.value} on cone {k}"
            )
    return first


def dfh_pullback(d: ToricDivisor, queries: Sequence[Sequence]) -> PullbackResult:
    require_valid(d.fan)
    return PullbackResult(d.coeffs, tuple(pullback_coefficient(d, u) for u in queries))


def finite_level_valuation(d: ToricDivisor, u: Sequence, k: int) -> Fraction:
    """``(1/k) * min <m,u>`` over lattice generators of ``{<m,u_rho> >= k d_rho}`` on a cone containing ``u``."""
    if k < 1:
        raise UsageError("k must be a positive integer")
    f = d.fan
    require_valid(f)
    u = _as_query(u, f.dim)
    scaled = d.scaled(-k)
    if not scaled.is_integral:
        raise PreconditionError(f"{k} * D is not integral")
    cone = _containing_cones(f, u)[0]
    gens = local_generators(scaled, cone).generators
    return Fraction(min(dot(g, u) for g in gens), k)


# ---------------------------------------------------------------------------
# relative canonical valuations


@dataclass(frozen=True)
class RelativeCanonicalValue:
    query: tuple
    val_minus: Fraction
    val_plus: Fraction
    exceptional: bool
    cone: int


def relative_canonical(f: Fan, u: Sequence) -> RelativeCanonicalValue:
    """Coefficients along ``u`` of ``K_Y + f^*(-K_X)`` (plus) and ``K_Y - f^*(K_X)`` (minus)."""
    require_valid(f)
    u = _as_query(u, f.dim)
    if content(u) != 1:
        raise DomainError(f"{u} is not primitive")
    plus = pullback_coefficient(anticanonical(f), u)
    minus = pullback_coefficient(canonical(f), u)
    val_plus = -1 + plus.coefficient
    val_minus = -1 - minus.coefficient
    if val_plus < val_minus:
        raise InternalInconsistencyError(f"val+ = {val_plus} < val- = {val_minus} along {u}")
    return RelativeCanonicalValue(u, val_minus, val_plus, f.ray_index(u) is None, plus.cone)


@dataclass(frozen=True)
class BoundaryValue:
    objective: tuple
    outcome: object  # Optimal | Unbounded | Infeasible

    @property
    def value(self) -> Optional[Fraction]:
        return self.outcome.value if isinstance(self.outcome, Optimal) else None


def boundary_objective(u: Sequence, mode: str) -> tuple:
    """``pairing`` gives ``<m,u>``; ``negated-last`` flips the sign of the last coordinate."""
    u = tuple(Fraction(x) for x in u)
    if mode == "pairing":
        return u
    if mode == "negated-last":
        return u[:-1] + (-u[-1],)
    raise UsageError(f"unknown boundary objective mode {mode!r}")


def boundary_region(f: Fan) -> HPolyhedron:
    """``{m : 1 <= <m,u_rho> <= 2}``: boundaries with coefficients in ``[0, 1]``."""
    normals = tuple(f.rays) + tuple(tuple(-x for x in u) for u in f.rays)
    return HPolyhedron(f.dim, normals, (1,) * f.n_rays + (-2,) * f.n_rays)


def boundary_inf_valuation(f: Fan, u: Sequence, mode: str = "pairing", objective: Optional[Sequence] = None) -> BoundaryValue:
    """Infimum of a linear objective over the boundary region of a one-cone fan."""
    require_valid(f)
    if len(f.max_cones) != 1:
        raise PreconditionError("boundary infimum is defined for a fan with a single maximal cone")
    u = _as_query(u, f.dim)
    if not f.cone(0).contains(u):
        raise DomainError(f"{u} is not in the cone")
    obj = tuple(Fraction(x) for x in objective) if objective is not None else boundary_objective(u, mode)
    return BoundaryValue(obj, lp_minimize(obj, boundary_region(f)))


# ---------------------------------------------------------------------------
# MLD search


@dataclass(frozen=True)
class MldReport:
    bound: int
    which: str
    rows: tuple  # RelativeCanonicalValue, sorted by query
    minimum: Optional[Fraction]
    argmin: Optional[tuple]
    exceptional_minimum: Optional[Fraction]
    exceptional_argmin: Optional[tuple]

    def value(self, row: RelativeCanonicalValue) -> Fraction:
        return row.val_plus if self.which == "plus" else row.val_minus

    def to_dict(self) -> dict:
        def fmt(x):
            return None if x is None else format_rational(x)

        return {
            "bound": self.bound,
            "which": self.which,
            "minimum": fmt(self.minimum),
            "argmin": None if self.argmin is None else list(self.argmin),
            "exceptional_minimum": fmt(self.exceptional_minimum),
            "exceptional_argmin": None if self.exceptional_argmin is None else list(self.exceptional_argmin),
            "rows": [
                {
                    "u": list(r.query),
                    "val_plus": format_rational(r.val_plus),
                    "val_minus": format_rational(r.val_minus),
                    "exceptional": r.exceptional,
                }
                for r in self.rows
            ],
        }


def mld_search(f: Fan, bound: int, which: str = "plus") -> MldReport:
    """Minimum of ``val+`` or ``val-`` over primitive ``u`` in the support with entries in ``[-bound, bound]``.

    The minimum is certified over the box only.
    """
    if which not in ("plus", "minus"):
        raise UsageError("which must be 'plus' or 'minus'")
    if bound < 1:
        raise UsageError("bound must be a positive integer")
    require_valid(f)
    cones = [f.cone(k) for k in range(len(f.max_cones))]
    rows = []
    for u in itertools.product(range(-bound, bound + 1), repeat=f.dim):
        if not any(u) or content(u) != 1:
            continue
        if not any(c.contains(u) for c in cones):
            continue
        rows.append(relative_canonical(f, u))
    report = MldReport(bound, which, tuple(rows), None, None, None, None)

    def best(candidates):
        if not candidates:
            return None, None
        r = min(candidates, key=lambda r: (report.value(r), r.query))
        return report.value(r), r.query

    m_all, a_all = best(rows)
    m_exc, a_exc = best([r for r in rows if r.exceptional])
    return MldReport(bound, which, tuple(rows), m_all, a_all, m_exc, a_exc)


# ---------------------------------------------------------------------------
# the accumulating family


U_E = (5, 0, 2)
ACC_COLUMNS = ("boundary_lp", "boundary_lp_pairing", "defn_lp")


def acc_family_rays(a: int) -> tuple:
    return ((2, -1, 0), (2, 0, 1), (1, 1, 1), (a, 1, 0))


def acc_family_fan(a: int) -> Fan:
    if a < 1:
        raise UsageError("family parameter a must be a positive integer")
    return Fan(3, acc_family_rays(a), ((0, 1, 2, 3),))


def acc_closed_form(a: int) -> Fraction:
    return Fraction(4 * a + 5, a + 2)


def acc_column_lp(column: str, a: Optional[int]) -> Fraction:
    """One table column as a direct LP; ``a=None`` replaces the ``a``-dependent ray by its limit.

    As ``a`` grows, ``<m,(a,1,0)> >= c`` divided by ``a`` tends to ``m_1 >= 0``.
    """
    base = acc_family_rays(1)[:3]
    if a is None:
        moving, lo, hi = (1, 0, 0), Fraction(0), Fraction(0)
    else:
        moving, lo, hi = (a, 1, 0), Fraction(1), Fraction(2)
    if column == "defn_lp":
        region = HPolyhedron(3, base + (moving,), (1, 1, 1, lo))
        objective, shift = U_E, -1
    elif column in ("boundary_lp", "boundary_lp_pairing"):
        normals = base + (moving,) + tuple(tuple(-x for x in u) for u in base + (moving,))
        region = HPolyhedron(3, normals, (1, 1, 1, lo, -2, -2, -2, -hi))
        objective = boundary_objective(U_E, "negated-last" if column == "boundary_lp" else "pairing")
        shift = 0
    else:
        raise UsageError(f"unknown column {column!r}")
    out = lp_minimize(objective, region)
    if not isinstance(out, Optimal):
        raise InternalInconsistencyError(f"{column} LP at a={a} is {type(out).__name__}")
    return shift + out.value


@dataclass(frozen=True)
class AccRow:
    a: int
    boundary_lp: Fraction  # objective 5x - 2z: last coordinate of u_E negated
    boundary_lp_pairing: Fraction  # objective <m, u_E> = 5x + 2z
    defn_lp: Fraction  # val+ along u_E from the pullback definition
    closed_form: Fraction

    @property
    def agreeing_columns(self) -> tuple:
        return tuple(c for c in ACC_COLUMNS if getattr(self, c) == self.closed_form)


def acc_family(a_values: Sequence[int]) -> list:
    rows = []
    for a in a_values:
        f = acc_family_fan(a)
        check = f.check
        if not check:
            raise InternalInconsistencyError(f"family fan invalid at a={a}: {check.reason}")
        if not isinstance(cartier_status(canonical(f)), NotQCartier):
            raise InternalInconsistencyError(f"K_X is Q-Cartier at a={a}")
        literal = boundary_inf_valuation(f, U_E, "negated-last").value
        pairing = boundary_inf_valuation(f, U_E, "pairing").value
        defn = relative_canonical(f, U_E).val_plus
        # independent route: the same LPs assembled by hand
        for name, v in (("boundary_lp", literal), ("boundary_lp_pairing", pairing), ("defn_lp", defn)):
            if acc_column_lp(name, a) != v:
                raise InternalInconsistencyError(f"{name} at a={a}: routes disagree")
        rows.append(AccRow(a, literal, pairing, defn, acc_closed_form(a)))
    return rows
