"""Small named fans used throughout the examples and tests."""
from __future__ import annotations

import itertools

from .fan import Fan
from .polyhedra import convex_hull, v_to_h


def projective_plane() -> Fan:
    return Fan(2, ((1, 0), (0, 1), (-1, -1)), ((0, 1), (1, 2), (0, 2)))


def face_fan(vertices) -> Fan:
    """Fan over the faces of a lattice polytope with primitive vertices and 0 in its interior."""
    verts = sorted(set(tuple(int(x) for x in v) for v in vertices))
    q = convex_hull(verts)
    n = len(verts[0])
    rays = tuple(tuple(int(x) for x in v) for v in q.vertices)
    cones = []
    for a, b in v_to_h(q).constraints:
        cones.append(tuple(i for i, r in enumerate(rays) if sum(x * y for x, y in zip(a, r)) == b))
    return Fan(n, rays, tuple(sorted(cones)))


def cube_fan() -> Fan:
    """Face fan of the cube with vertices ``(±1,±1,±1)``: six square cones."""
    return face_fan(itertools.product((-1, 1), repeat=3))


def quadric_cone() -> Fan:
    """The affine cone over a quadric surface: one cone on ``e1, e2, e1+e3, e2+e3``."""
    return Fan(3, ((1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)), ((0, 1, 2, 3),))


def smooth_quadrant(n: int = 2) -> Fan:
    rays = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return Fan(n, rays, (tuple(range(n)),))
