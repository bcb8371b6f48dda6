"""Random instances and small oracles shared by the tests."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from toridiv.catalog import face_fan
from toridiv.exact_linear import content, rank
from toridiv.polyhedra import convex_hull, v_to_h


def random_complete_fan(rng: random.Random, n: int, n_points: int = None, box: int = 1):
    """Face fan of the hull of random primitive vectors with entries in [-box, box]."""
    if n_points is None:
        n_points = rng.randint(n + 1, 2 * n + 3)
    pool = [v for v in itertools.product(range(-box, box + 1), repeat=n) if any(v) and content(v) == 1]
    while True:
        pts = rng.sample(pool, n_points)
        if rank([list(p) for p in pts]) < n:
            continue
        h = v_to_h(convex_hull(pts))
        if all(b < 0 for _, b in h.constraints) and len(h.constraints) > n:
            return face_fan(pts)


def brute_force_lattice_points(p, radius: int):
    """Integer points of ``p`` inside the cube ``[-radius, radius]^n`` by exhaustive search."""
    return sorted(x for x in itertools.product(range(-radius, radius + 1), repeat=p.dim) if p.contains(x))


def vertex_enumeration_min(objective, p):
    """min of a linear objective over a bounded-below pointed polyhedron by checking every basic feasible point."""
    from toridiv.exact_linear import Solution, solve_rational

    best = None
    for rows in itertools.combinations(range(len(p.normals)), p.dim):
        A = [list(p.normals[i]) for i in rows]
        if rank(A) < p.dim:
            continue
        sol = solve_rational(A, [p.rhs[i] for i in rows])
        if isinstance(sol, Solution) and p.contains(sol.x):
            val = sum(Fraction(a) * b for a, b in zip(objective, sol.x))
            best = val if best is None else min(best, val)
    return best


ACCEPTANCE_LINES: list = []


def record(label: str, ok: bool, detail: str = "") -> bool:
    """Print and remember one PASS/FAIL line for the acceptance summary."""
    line = f"{'PASS' if ok else 'FAIL'} {label}" + (f": {detail}" if detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok
