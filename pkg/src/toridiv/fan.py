"""Rational polyhedral fans stored by their maximal cones."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

from .errors import PreconditionError, UsageError
from .exact_linear import content, integer_direction, rank, to_fractions
from .polyhedra import PointedCone, VPolyhedron, cone_generators, v_to_h


@dataclass(frozen=True)
class Cone:
    """A maximal cone of a fan: its ray indices plus cached geometry."""

    index: int
    ray_indices: tuple
    geometry: PointedCone

    @property
    def facets(self) -> list:
        """Facets as ``(normal, frozenset of fan ray indices)``."""
        out = []
        for h, tight in self.geometry.facets:
            out.append((h, frozenset(self._fan_index[i] for i in tight)))
        return out

    @cached_property
    def _fan_index(self) -> dict:
        return {i: self.ray_indices[i] for i in range(len(self.ray_indices))}

    def contains(self, u: Sequence) -> bool:
        return self.geometry.contains(u)


@dataclass(frozen=True)
class FanCheck:
    valid: bool
    reason: str = ""
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class Fan:
    """A fan in ``N_R = R^dim`` given by primitive rays and maximal cones.

    ``max_cones`` are tuples of 0-based ray indices. Construction normalizes
    each cone to a sorted tuple but does not reorder the cone list, so cone
    indices in reports refer to the input order.
    """

    dim: int
    rays: tuple
    max_cones: tuple

    def __post_init__(self):
        rays = tuple(tuple(int(x) for x in r) for r in self.rays)
        cones = tuple(tuple(sorted(int(i) for i in c)) for c in self.max_cones)
        for r in rays:
            if len(r) != self.dim:
                raise UsageError(f"ray {r} does not live in dimension {self.dim}")
        for c in cones:
            for i in c:
                if not 0 <= i < len(rays):
                    raise UsageError(f"cone {c} refers to missing ray {i}")
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "max_cones", cones)

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    @cached_property
    def _ray_lookup(self) -> dict:
        return {r: i for i, r in enumerate(self.rays)}

    def ray_index(self, u: Sequence) -> Optional[int]:
        try:
            return self._ray_lookup.get(integer_direction(u))
        except Exception:
            return None

    @cached_property
    def _cones(self) -> tuple:
        out = []
        for k, c in enumerate(self.max_cones):
            geom = PointedCone.from_generators([self.rays[i] for i in c])
            # PointedCone sorts its rays; map them back to fan indices
            order = []
            for r in geom.rays:
                j = self._ray_lookup.get(r)
                if j is None or j not in c:
                    raise PreconditionError(f"cone {k} has an extreme ray {r} that is not one of its listed rays")
                order.append(j)
            out.append(Cone(k, tuple(order), geom))
        return tuple(out)

    @cached_property
    def check(self) -> "FanCheck":
        return validate_fan(self)

    @cached_property
    def complete(self) -> bool:
        return is_complete(self)

    def cone(self, k: int) -> Cone:
        return self._cones[k]

    @property
    def cones(self) -> tuple:
        return self._cones

    def cone_facets(self, k: int) -> list:
        return self.cone(k).facets

    def walls(self) -> list:
        """Codimension-one faces shared by two maximal cones: ``(ray set, i, j)``."""
        seen: dict = {}
        for k in range(len(self.max_cones)):
            for _, tight in self.cone_facets(k):
                seen.setdefault(tight, []).append(k)
        out = []
        for tight, owners in sorted(seen.items(), key=lambda kv: sorted(kv[0])):
            if len(owners) == 2:
                out.append((tight, owners[0], owners[1]))
        return out

    def to_dict(self) -> dict:
        return {"dim": self.dim, "rays": [list(r) for r in self.rays], "max_cones": [list(c) for c in self.max_cones]}

    @classmethod
    def from_dict(cls, data: dict) -> "Fan":
        try:
            rays = [tuple(int(x) for x in r) for r in data["rays"]]
            dim = int(data["dim"]) if "dim" in data else len(rays[0])
            cones = [tuple(int(i) for i in c) for c in data["max_cones"]]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise UsageError(f"malformed fan JSON: {exc}") from exc
        return cls(dim, tuple(rays), tuple(cones))


def _intersection_is_common_face(f: Fan, i: int, j: int) -> bool:
    ci, cj = f.cone(i), f.cone(j)
    rows = [h for h, _ in ci.geometry.facets] + [h for h, _ in cj.geometry.facets]
    ext, lines = cone_generators(rows, f.dim)
    assert not lines
    common = set(ci.ray_indices) & set(cj.ray_indices)
    for r in ext:
        k = f._ray_lookup.get(r)
        if k is None or k not in common:
            return False
    for c in (ci, cj):
        local = [c.ray_indices.index(k) for k in common]
        closure = {c.ray_indices[t] for t in c.geometry.face_closure(local)} if local else set()
        if closure != common:
            return False
    return True


def validate_fan(f: Fan) -> FanCheck:
    """Check every fan invariant; report the first violation with its witness."""
    n = f.dim
    for k, r in enumerate(f.rays):
        if not any(r):
            return FanCheck(False, f"ray {k} is zero", (k,))
        if content(r) != 1:
            return FanCheck(False, f"ray {k} = {r} is not primitive", (k,))
    if len(set(f.rays)) != len(f.rays):
        dup = next(k for k, r in enumerate(f.rays) if f.rays.index(r) != k)
        return FanCheck(False, f"ray {dup} repeats ray {f.rays.index(f.rays[dup])}", (f.rays.index(f.rays[dup]), dup))
    if not f.max_cones:
        return FanCheck(False, "fan has no maximal cones")
    used = set()
    for k, c in enumerate(f.max_cones):
        if not c:
            return FanCheck(False, f"cone {k} is empty", (k,))
        if len(set(c)) != len(c):
            return FanCheck(False, f"cone {k} lists a ray twice", (k,))
        if rank([list(f.rays[i]) for i in c]) < n:
            return FanCheck(False, f"cone {k} is not full-dimensional (torus factors are not supported)", (k,))
        try:
            geom = f.cone(k)
        except PreconditionError as exc:
            return FanCheck(False, f"cone {k}: {exc}", (k,))
        if set(geom.ray_indices) != set(c):
            extra = sorted(set(c) - set(geom.ray_indices))
            return FanCheck(False, f"cone {k} lists non-extreme rays {extra}", (k,))
        used.update(c)
    missing = sorted(set(range(f.n_rays)) - used)
    if missing:
        return FanCheck(False, f"rays {missing} belong to no maximal cone", tuple(missing))
    if len(set(f.max_cones)) != len(f.max_cones):
        return FanCheck(False, "a maximal cone is listed twice")
    for i, j in itertools.combinations(range(len(f.max_cones)), 2):
        if not _intersection_is_common_face(f, i, j):
            return FanCheck(False, f"cones {i} and {j} do not meet in a common face", (i, j))
    return FanCheck(True)


def require_valid(f: Fan) -> None:
    check = f.check
    if not check:
        raise PreconditionError(f"invalid fan: {check.reason}")


def is_complete(f: Fan) -> bool:
    """Support is all of ``N_R``: every facet shared by exactly two cones and the adjacency graph is connected."""
    counts: dict = {}
    for k in range(len(f.max_cones)):
        for _, tight in f.cone_facets(k):
            counts.setdefault(tight, []).append(k)
    if any(len(v) != 2 for v in counts.values()):
        return False
    adj = {k: set() for k in range(len(f.max_cones))}
    for a, b in counts.values():
        adj[a].add(b)
        adj[b].add(a)
    seen, stack = {0}, [0]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(f.max_cones)


def locate(f: Fan, u: Sequence) -> list:
    """Indices of all maximal cones containing ``u``."""
    if len(u) != f.dim:
        raise UsageError(f"vector of length {len(u)} in a fan of dimension {f.dim}")
    u = to_fractions(u)
    return [k for k in range(len(f.max_cones)) if f.cone(k).contains(u)]


def _fan_from_cone_sets(f: Fan, cone_vectors: list) -> Fan:
    """Assemble a fan whose rays extend those of ``f``; new rays appended in sorted order."""
    lookup = dict(f._ray_lookup)
    new_rays = sorted({r for cone in cone_vectors for r in cone if r not in lookup})
    rays = list(f.rays) + new_rays
    for k, r in enumerate(new_rays):
        lookup[r] = len(f.rays) + k
    cones = sorted({tuple(sorted(lookup[r] for r in cone)) for cone in cone_vectors})
    return Fan(f.dim, tuple(rays), tuple(cones))


def refine_by_polytope(f: Fan, q: VPolyhedron) -> Fan:
    """Common refinement of ``f`` with the face fan of the polytope ``q``.

    Each maximal cone is intersected with the cone over each facet of ``q``;
    lower-dimensional pieces are dropped. New rays may appear; smallness is
    checked separately by :func:`is_refinement_small`.
    """
    require_valid(f)
    if q.dim != f.dim or not q.is_bounded:
        raise PreconditionError("refining polytope must be bounded and of the fan's dimension")
    h = v_to_h(q)
    pairs = set(h.constraints)
    for a, b in h.constraints:
        if b >= 0 or (tuple(-x for x in a), -b) in pairs:
            raise PreconditionError("refining polytope must be full-dimensional with 0 in its interior")
    facet_cones = []
    for a, b in h.constraints:
        verts = [v for v in q.vertices if sum(x * y for x, y in zip(a, v)) == b]
        facet_cones.append(PointedCone.from_generators([integer_direction(v) for v in verts]))
    pieces = []
    for k in range(len(f.max_cones)):
        sigma = f.cone(k).geometry
        for fc in facet_cones:
            rows = [hh for hh, _ in sigma.facets] + [hh for hh, _ in fc.facets]
            ext, lines = cone_generators(rows, f.dim)
            assert not lines
            if len(ext) >= f.dim and rank([list(r) for r in ext]) == f.dim:
                pieces.append(tuple(sorted(ext)))
    out = _fan_from_cone_sets(f, pieces)
    require_valid(out)
    return out


def cones_of_f2_inside_f(f: Fan, f2: Fan) -> list:
    """For each cone of ``f2`` the index of a cone of ``f`` containing it, or None."""
    out = []
    for c in f2.max_cones:
        home = None
        for k in range(len(f.max_cones)):
            if all(f.cone(k).contains(f2.rays[i]) for i in c):
                home = k
                break
        out.append(home)
    return out


def is_refinement_small(f: Fan, f2: Fan) -> bool:
    """True iff ``f2`` refines ``f`` without adding rays."""
    if f2.dim != f.dim:
        raise UsageError("fans of different dimensions")
    homes = cones_of_f2_inside_f(f, f2)
    if any(h is None for h in homes):
        bad = homes.index(None)
        raise UsageError(f"cone {bad} of the second fan lies in no cone of the first: not a refinement")
    return set(f.rays) == set(f2.rays)


def require_complete(f: Fan) -> None:
    require_valid(f)
    if not f.complete:
        raise PreconditionError("fan is not complete")
