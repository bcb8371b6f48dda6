"""Torus-invariant Weil divisors and their sheaves of sections."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InternalInconsistencyError, PreconditionError, UsageError
from .exact_linear import (
    Inconsistent,
    dot,
    format_rational,
    lcm_of_denominators,
    parse_rational,
    solve_rational,
)
from .fan import Fan, require_complete, require_valid
from .polyhedra import (
    HPolyhedron,
    PointedCone,
    convex_hull,
    count_lattice_points,
    h_to_v,
    hilbert_basis,
    lattice_points,
    rational_bounding_box,
    triangulate,
    v_to_h,
)


@dataclass(frozen=True)
class ToricDivisor:
    """``sum d_rho D_rho`` with one rational coefficient per ray of ``fan``."""

    fan: Fan
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(parse_rational(c) for c in self.coeffs)
        if len(coeffs) != self.fan.n_rays:
            raise UsageError(f"divisor has {len(coeffs)} coefficients but the fan has {self.fan.n_rays} rays")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    @property
    def is_effective(self) -> bool:
        return all(c >= 0 for c in self.coeffs)

    def __add__(self, other: "ToricDivisor") -> "ToricDivisor":
        if other.fan != self.fan:
            raise UsageError("divisors on different fans")
        return ToricDivisor(self.fan, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "ToricDivisor":
        return ToricDivisor(self.fan, tuple(-a for a in self.coeffs))

    def __sub__(self, other: "ToricDivisor") -> "ToricDivisor":
        return self + (-other)

    def scaled(self, factor) -> "ToricDivisor":
        f = parse_rational(factor) if isinstance(factor, str) else Fraction(factor)
        return ToricDivisor(self.fan, tuple(f * a for a in self.coeffs))

    def __rmul__(self, factor) -> "ToricDivisor":
        return self.scaled(factor)

    def to_dict(self) -> dict:
        return {"coeffs": [format_rational(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, fan: Fan, data: dict) -> "ToricDivisor":
        try:
            coeffs = data["coeffs"]
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed divisor JSON: {exc}") from exc
        if not isinstance(coeffs, list):
            raise UsageError("divisor JSON: 'coeffs' must be a list")
        return cls(fan, tuple(coeffs))


def prime_divisor(fan: Fan, index: int, coeff=1) -> ToricDivisor:
    return ToricDivisor(fan, tuple(coeff if i == index else 0 for i in range(fan.n_rays)))


def anticanonical(fan: Fan) -> ToricDivisor:
    """``-K_X``: coefficient 1 on every ray."""
    return ToricDivisor(fan, (1,) * fan.n_rays)


def canonical(fan: Fan) -> ToricDivisor:
    """``K_X``: coefficient -1 on every ray."""
    return ToricDivisor(fan, (-1,) * fan.n_rays)


def polytope_PD(d: ToricDivisor) -> HPolyhedron:
    """``{m : <m, u_rho> >= -d_rho for every ray}``."""
    f = d.fan
    return HPolyhedron(f.dim, tuple(f.rays), tuple(-c for c in d.coeffs))


def local_polyhedron(d: ToricDivisor, cone: int) -> HPolyhedron:
    """The same constraints restricted to the rays of one maximal cone."""
    f = d.fan
    idx = f.max_cones[cone]
    return HPolyhedron(f.dim, tuple(f.rays[i] for i in idx), tuple(-d.coeffs[i] for i in idx))


# ---------------------------------------------------------------------------
# Cartier data


@dataclass(frozen=True)
class Cartier:
    data: tuple  # integral m_sigma per maximal cone, <m_sigma, u_rho> = -d_rho
    index: int = 1

    @property
    def rational_data(self) -> tuple:
        return self.data


@dataclass(frozen=True)
class QCartier:
    index: int
    data: tuple  # Cartier data of index * D

    @property
    def rational_data(self) -> tuple:
        return tuple(tuple(Fraction(x, self.index) for x in m) for m in self.data)


@dataclass(frozen=True)
class NotQCartier:
    cone: int


CartierStatus = Union[Cartier, QCartier, NotQCartier]


def _local_data(d: ToricDivisor) -> Union[list, int]:
    f = d.fan
    out = []
    for k, c in enumerate(f.max_cones):
        sol = solve_rational([list(f.rays[i]) for i in c], [-d.coeffs[i] for i in c])
        if isinstance(sol, Inconsistent):
            return k
        # full-dimensional cones pin m_sigma down uniquely
        assert not sol.kernel
        out.append(sol.x)
    return out


def cartier_status(d: ToricDivisor) -> CartierStatus:
    require_valid(d.fan)
    data = _local_data(d)
    if isinstance(data, int):
        return NotQCartier(data)
    k = lcm_of_denominators(x for m in data for x in m)
    if k == 1:
        return Cartier(tuple(tuple(int(x) for x in m) for m in data))
    return QCartier(k, tuple(tuple(int(x * k) for x in m) for m in data))


def rational_cartier_data(d: ToricDivisor) -> tuple:
    """Per-cone ``m_sigma`` for a Q-Cartier divisor (rational entries)."""
    status = cartier_status(d)
    if isinstance(status, NotQCartier):
        raise PreconditionError(f"divisor is not Q-Cartier (cone {status.cone})")
    return status.rational_data


# ---------------------------------------------------------------------------
# local section modules


@dataclass(frozen=True)
class LocalModule:
    cone: int
    generators: tuple


def _require_integral(d: ToricDivisor, what: str) -> None:
    if not d.is_integral:
        raise PreconditionError(f"{what} needs an integral divisor")


def _slacks(points: np.ndarray, rays: list, shift: list) -> np.ndarray:
    U = np.array(rays, dtype=np.int64).reshape(len(rays), -1)
    return points @ U.T - np.array(shift, dtype=np.int64)


def _irreducible(points: np.ndarray, rays: list, shift: list, semigroup: list) -> np.ndarray:
    """Mask of module points that stay outside the module after subtracting any semigroup generator."""
    S = _slacks(points, rays, shift)
    U = np.array(rays, dtype=np.int64).reshape(len(rays), -1)
    reducible = np.zeros(len(points), dtype=bool)
    for h in semigroup:
        reducible |= np.all(S >= U @ np.array(h, dtype=np.int64), axis=1)
    return np.all(S >= 0, axis=1) & ~reducible


def _points_array(pts: list, n: int) -> np.ndarray:
    return np.array(pts, dtype=np.int64).reshape(len(pts), n)


@lru_cache(maxsize=4096)
def _module_generators(fan: Fan, coeffs: tuple, cone: int) -> tuple:
    n = fan.dim
    idx = fan.max_cones[cone]
    rays = [fan.rays[i] for i in idx]
    shift = [int(-coeffs[i]) for i in idx]  # slack_rho(m) = <m,u_rho> - shift_rho
    region = HPolyhedron(n, tuple(rays), tuple(shift))
    verts = h_to_v(region).vertices
    dual = PointedCone.from_generators([h for h, _ in fan.cone(cone).geometry.facets])
    semigroup = hilbert_basis(dual)

    # every minimal generator is q + sum(frac_w * w), q in conv(vertices), w in one simplex of the dual cone
    found = set()
    for simplex in triangulate(dual):
        ws = [dual.rays[i] for i in simplex]
        corners = set()
        for sub in itertools.product((0, 1), repeat=len(ws)):
            step = [sum(c * w[j] for c, w in zip(sub, ws)) for j in range(n)]
            corners.update(tuple(v[j] + step[j] for j in range(n)) for v in verts)
        hull = v_to_h(convex_hull(sorted(corners)))
        found.update(lattice_points(hull))
    cands = _points_array(sorted(found), n)
    gens = sorted(tuple(int(x) for x in row) for row in cands[_irreducible(cands, rays, shift, semigroup)])
    _verify_generation(n, rays, shift, semigroup, gens)
    return tuple(gens)


VERIFY_POINT_LIMIT = 200_000


def _verify_generation(n: int, rays: list, shift: list, semigroup: list, gens: list) -> None:
    """Every irreducible module element of bounded total slack must be a listed generator."""
    if not gens:
        raise InternalInconsistencyError("local module has no generators")
    gen_slack = [sum(dot(u, g) - s for u, s in zip(rays, shift)) for g in gens]
    step = max(sum(dot(h, u) for u in rays) for h in semigroup)
    # total slack up to twice the largest generator's; one semigroup step past it when that is too many points
    for limit in (max(2 * max(gen_slack), 2), max(gen_slack) + step):
        normals = tuple(rays) + (tuple(-sum(u[j] for u in rays) for j in range(n)),)
        test = HPolyhedron(n, normals, tuple(shift) + (-(limit + sum(shift)),))
        if count_lattice_points(test) <= VERIFY_POINT_LIMIT:
            break
    pts = _points_array(lattice_points(test), n)
    irr = {tuple(int(x) for x in row) for row in pts[_irreducible(pts, rays, shift, semigroup)]}
    missing = sorted(irr - set(gens))
    if missing:
        raise InternalInconsistencyError(f"module element {missing[0]} is not generated by {gens}")


def local_generators(d: ToricDivisor, cone: int) -> LocalModule:
    """Minimal generators of ``{m in M : <m,u_rho> >= -d_rho, rho in cone}`` over the dual cone's semigroup."""
    require_valid(d.fan)
    _require_integral(d, "local_generators")
    if not 0 <= cone < len(d.fan.max_cones):
        raise UsageError(f"no maximal cone {cone}")
    return LocalModule(cone, _module_generators(d.fan, d.coeffs, cone))


# ---------------------------------------------------------------------------
# global sections


@dataclass(frozen=True)
class GlobalGeneration:
    generated: bool
    witness: Optional[tuple] = None  # (cone index, local generator outside P_D)

    def __bool__(self) -> bool:
        return self.generated


def is_globally_generated(d: ToricDivisor) -> GlobalGeneration:
    require_complete(d.fan)
    _require_integral(d, "is_globally_generated")
    p = polytope_PD(d)
    for k in range(len(d.fan.max_cones)):
        for g in local_generators(d, k).generators:
            if not p.contains(g):
                return GlobalGeneration(False, (k, g))
    return GlobalGeneration(True)


def global_sections(d: ToricDivisor) -> list:
    """Characters ``m`` with ``chi^m`` a global section: the lattice points of ``P_D``."""
    require_complete(d.fan)
    _require_integral(d, "global_sections")
    return lattice_points(polytope_PD(d))


def section_hilbert_function(d: ToricDivisor, m_max: int) -> list:
    """``h^0(mD)`` for ``m = 0..m_max``."""
    if m_max < 0:
        raise UsageError("m_max must be nonnegative")
    require_complete(d.fan)
    _require_integral(d, "section_hilbert_function")
    p = polytope_PD(d)
    box = rational_bounding_box(p)
    out = [1]
    for m in range(1, m_max + 1):
        if box is None:
            out.append(0)
            continue
        lo = [math.ceil(m * x) for x in box[0]]
        hi = [math.floor(m * x) for x in box[1]]
        out.append(count_lattice_points(p.scaled(m), (lo, hi)))
    return out


def vertex_denominator(d: ToricDivisor) -> int:
    """lcm of the denominators of the vertices of ``P_D`` (1 when empty)."""
    v = h_to_v(polytope_PD(d))
    return lcm_of_denominators(x for p in v.vertices for x in p)


@dataclass(frozen=True)
class QuasiPolynomialFit:
    period: int
    degree: int
    start: int
    checks: int  # fewest surplus values per residue class beyond what the fit consumes


def _forward_differences(seq: Sequence, order: int) -> list:
    for _ in range(order):
        seq = [b - a for a, b in zip(seq, seq[1:])]
    return list(seq)


def fits_quasi_polynomial(values: Sequence[int], degree: int, period: int, start: int = 0) -> Optional[int]:
    """Surplus checks if ``values[start:]`` agrees with a quasi-polynomial of the given degree and period.

    Equivalently, the ``degree``-th step-``period`` differences are constant on
    each residue class. Returns None when some class disagrees or lacks a
    point beyond the ``degree + 1`` needed to fit it.
    """
    surplus = None
    for r in range(start, start + period):
        seq = list(values[r::period])
        if len(seq) < degree + 2:
            return None
        if any(_forward_differences(seq, degree + 1)):
            return None
        extra = len(seq) - degree - 1
        surplus = extra if surplus is None else min(surplus, extra)
    return surplus


def detect_quasi_polynomial(
    values: Sequence[int], degree: int, max_period: Optional[int] = None, max_start: int = 1
) -> Optional[QuasiPolynomialFit]:
    """Smallest period (then smallest start) at which the values become quasi-polynomial."""
    if max_period is None:
        max_period = len(values)
    for p in range(1, max_period + 1):
        for s in range(max_start + 1):
            extra = fits_quasi_polynomial(values, degree, p, s)
            if extra is not None:
                return QuasiPolynomialFit(p, degree, s, extra)
    return None
