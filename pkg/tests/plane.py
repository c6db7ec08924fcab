"""Drawings of the Ã2 apartment in the plane, for the figure-based tests.

The figures place vertices at m·a0 + n·a1 with a0, a1, a2 = a1 - a0 the
unit directions of the triangulation.  In the oblique basis (a0, a1) the
walls are the lines m = c, n = c and m + n = c, which are the walls
x0 - x2 = c, x1 - x2 = -c and x0 - x1 = c of the vertex (m, -n, 0).
"""

from fractions import Fraction

from btcosheaf import Apartment

A2 = Apartment(3)


def vertex(m: int, n: int):
    return A2.vertex((m, -n, 0))


def plane(v) -> tuple[int, int]:
    """Inverse of vertex()."""
    return (v[0] - v[2], v[2] - v[1])


def _on_segment(p, a, b) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    return cross == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) \
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def in_polygon(p, poly) -> bool:
    """Closed polygon membership, exact for rational points."""
    edges = list(zip(poly, poly[1:] + poly[:1]))
    if any(_on_segment(p, a, b) for a, b in edges):
        return True
    x, y = Fraction(p[0]), Fraction(p[1])
    inside = False
    for a, b in edges:
        if (a[1] > y) != (b[1] > y):
            t = a[0] + (y - a[1]) * Fraction(b[0] - a[0], b[1] - a[1])
            if x < t:
                inside = not inside
    return inside


def lattice_points(poly) -> set:
    lo_m, hi_m = min(p[0] for p in poly), max(p[0] for p in poly)
    lo_n, hi_n = min(p[1] for p in poly), max(p[1] for p in poly)
    return {(m, n) for m in range(lo_m, hi_m + 1) for n in range(lo_n, hi_n + 1)
            if in_polygon((m, n), poly)}


def region(poly, segments=()):
    """Closed region of a lattice polygon, with optional extra edges, as a subcomplex.

    A simplex belongs to the region when its barycenter lies in the closed
    polygon (or on one of the extra segments).
    """
    pts = lattice_points(poly)
    for a, b in segments:
        pts |= {p for p in lattice_points([a, b])}
    whole = A2.induced([vertex(*p) for p in pts])

    def keep(s):
        ps = [plane(v) for v in s]
        c = (Fraction(sum(p[0] for p in ps), len(ps)), Fraction(sum(p[1] for p in ps), len(ps)))
        return in_polygon(c, poly) or any(_on_segment(c, a, b) for a, b in segments)

    return A2.complex(s for s in whole.simplices if keep(s))
