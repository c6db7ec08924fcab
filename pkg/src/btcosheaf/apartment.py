"""Combinatorics of one apartment of type Ã (possibly a product of Ã factors).

A vertex of an irreducible factor Ã_{n-1} is an integer vector of length n
taken modulo the all-ones vector; it is stored with its last coordinate set
to 0.  A product apartment concatenates the coordinate blocks of its
factors, and every block is normalized separately.

Vertices are plain ``tuple[int, ...]`` values and polysimplices are
``frozenset`` of vertices.  All of the geometry goes through an
``Apartment`` instance, which knows the factor structure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

Vertex = tuple[int, ...]
Simplex = frozenset


class ApartmentError(ValueError):
    pass


class NotAdjacent(ApartmentError):
    pass


class PreconditionViolated(ApartmentError):
    pass


class BudgetExceeded(RuntimeError):
    pass


DEFAULT_BUDGET = 200_000


class AffineRoot(NamedTuple):
    """The affine function x -> x[i] - x[j] - k."""

    i: int
    j: int
    k: int

    def __call__(self, point: Sequence) -> Fraction:
        return eval_root(self, point)


def eval_root(root: AffineRoot, point: Sequence) -> Fraction:
    if root.i == root.j:
        raise ApartmentError("affine root needs i != j")
    return Fraction(point[root.i]) - Fraction(point[root.j]) - root.k


@dataclass(frozen=True)
class SubComplex:
    """A finite face-closed set of polysimplices in a fixed apartment."""

    apartment: "Apartment"
    simplices: frozenset
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __contains__(self, s) -> bool:
        return s in self.simplices

    def __iter__(self):
        return iter(self.sorted_simplices())

    def __len__(self) -> int:
        return len(self.simplices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubComplex):
            return NotImplemented
        return self.apartment == other.apartment and self.simplices == other.simplices

    def __hash__(self):
        return hash((self.apartment, self.simplices))

    def vertices(self) -> list[Vertex]:
        if "vertices" not in self._cache:
            vs = set()
            for s in self.simplices:
                vs.update(s)
            self._cache["vertices"] = sorted(vs)
        return self._cache["vertices"]

    def sorted_simplices(self) -> list[frozenset]:
        if "sorted" not in self._cache:
            dim = self.apartment.dim
            self._cache["sorted"] = sorted(self.simplices, key=lambda s: (dim(s), sorted(s)))
        return self._cache["sorted"]

    def by_dimension(self) -> dict[int, list[frozenset]]:
        out: dict[int, list[frozenset]] = {}
        for s in self.sorted_simplices():
            out.setdefault(self.apartment.dim(s), []).append(s)
        return out

    def maximal(self) -> list[frozenset]:
        if "maximal" not in self._cache:
            ss = self.sorted_simplices()
            verts = {}
            for s in ss:
                for v in s:
                    verts.setdefault(v, []).append(s)
            out = []
            for s in ss:
                v0 = next(iter(s))
                if not any(t != s and s < t for t in verts[v0]):
                    out.append(s)
            self._cache["maximal"] = out
        return self._cache["maximal"]

    def is_face_closed(self) -> bool:
        faces = self.apartment.faces
        return all(f in self.simplices for s in self.simplices for f in faces(s))

    def union(self, other: "SubComplex") -> "SubComplex":
        return SubComplex(self.apartment, self.simplices | other.simplices)

    def intersection(self, other: "SubComplex") -> "SubComplex":
        return SubComplex(self.apartment, self.simplices & other.simplices)

    def issubset(self, other: "SubComplex") -> bool:
        return self.simplices <= other.simplices

    def to_json(self) -> dict:
        return {
            "type": "A~",
            "d": self.apartment.d,
            "factors": list(self.apartment.factors),
            "vertices": [list(v) for v in self.vertices()],
            "simplices": [[list(v) for v in sorted(s)] for s in self.sorted_simplices()],
        }


@dataclass(frozen=True)
class Apartment:
    """An apartment of type Ã_{n_1-1} x ... x Ã_{n_k-1}.

    ``factors`` lists the coordinate block sizes n_1, ..., n_k; ``d`` is
    their sum and equals the length of every vertex tuple.
    """

    factors: tuple[int, ...]

    def __init__(self, factors):
        if isinstance(factors, int):
            factors = (factors,)
        factors = tuple(int(f) for f in factors)
        if not factors or any(f < 2 for f in factors):
            raise ApartmentError("each factor needs at least two coordinates")
        object.__setattr__(self, "factors", factors)

    @property
    def d(self) -> int:
        return sum(self.factors)

    @property
    def irreducible(self) -> bool:
        return len(self.factors) == 1

    def blocks(self) -> list[range]:
        out, off = [], 0
        for f in self.factors:
            out.append(range(off, off + f))
            off += f
        return out

    def rank(self) -> int:
        """Dimension of a chamber."""
        return sum(f - 1 for f in self.factors)

    # vertices ---------------------------------------------------------
    def vertex(self, coords: Sequence[int]) -> Vertex:
        if len(coords) != self.d:
            raise ApartmentError(f"expected {self.d} coordinates, got {len(coords)}")
        out = []
        for b in self.blocks():
            last = int(coords[b[-1]])
            out.extend(int(coords[i]) - last for i in b)
        return tuple(out)

    def project(self, v: Sequence, b: int):
        blk = self.blocks()[b]
        return tuple(v[i] for i in blk)

    def join(self, parts: Sequence[Sequence[int]]) -> Vertex:
        return tuple(c for part in parts for c in part)

    def adjacent(self, v: Vertex, w: Vertex) -> bool:
        """True iff v and w span a polysimplex (equal vertices count)."""
        for b in self.blocks():
            diffs = [v[i] - w[i] for i in b]
            if max(diffs) - min(diffs) > 1:
                return False
        return True

    def neighbors(self, v: Vertex) -> list[Vertex]:
        """All vertices adjacent to v and different from it."""
        per_block = []
        for b in self.blocks():
            n = len(b)
            base = [v[i] for i in b]
            opts = []
            for mask in range(0, 2 ** n - 1):
                vec = [base[t] + ((mask >> t) & 1) for t in range(n)]
                last = vec[-1]
                opts.append(tuple(c - last for c in vec))
            per_block.append(opts)
        out = []
        for combo in itertools.product(*per_block):
            w = self.join(combo)
            if w != v:
                out.append(w)
        return sorted(set(out))

    # polysimplices ----------------------------------------------------
    def factor_parts(self, s: Iterable[Vertex]) -> list[frozenset]:
        s = list(s)
        return [frozenset(self.project(v, b) for v in s) for b in range(len(self.factors))]

    def is_polysimplex(self, s: Iterable[Vertex]) -> bool:
        s = frozenset(s)
        if not s:
            return False
        if not all(self.adjacent(v, w) for v, w in itertools.combinations(sorted(s), 2)):
            return False
        parts = self.factor_parts(s)
        expected = 1
        for p in parts:
            expected *= len(p)
        return expected == len(s)

    def span(self, vertices: Iterable[Vertex]) -> frozenset:
        """The polysimplex spanned by pairwise adjacent vertices."""
        vs = sorted(set(vertices))
        if not vs:
            raise ApartmentError("cannot span the empty set")
        for v, w in itertools.combinations(vs, 2):
            if not self.adjacent(v, w):
                raise NotAdjacent(f"{v} and {w} are not adjacent")
        if self.irreducible:
            return frozenset(vs)
        parts = [sorted(p) for p in self.factor_parts(vs)]
        return frozenset(self.join(c) for c in itertools.product(*parts))

    def dim(self, s: Iterable[Vertex]) -> int:
        if self.irreducible:
            return len(s) - 1  # type: ignore[arg-type]
        return sum(len(p) - 1 for p in self.factor_parts(s))

    def faces(self, s: frozenset) -> list[frozenset]:
        """All nonempty faces of s (including s), ordered by dimension."""
        if self.irreducible:
            vs = sorted(s)
            out = [frozenset(c) for r in range(1, len(vs) + 1) for c in itertools.combinations(vs, r)]
            return out
        parts = [sorted(p) for p in self.factor_parts(s)]
        subsets = []
        for p in parts:
            subsets.append([c for r in range(1, len(p) + 1) for c in itertools.combinations(p, r)])
        out = []
        for combo in itertools.product(*subsets):
            out.append(frozenset(self.join(c) for c in itertools.product(*combo)))
        out.sort(key=lambda f: (self.dim(f), sorted(f)))
        return out

    def proper_faces(self, s: frozenset) -> list[frozenset]:
        return [f for f in self.faces(s) if f != s]

    def facets_of(self, s: frozenset) -> list[frozenset]:
        """Codimension-one faces."""
        n = self.dim(s)
        return [f for f in self.faces(s) if self.dim(f) == n - 1]

    def is_face(self, t: frozenset, s: frozenset) -> bool:
        """t is a face of s (t ≺ s); for polysimplices this is containment."""
        return t <= s

    def order(self, s: frozenset) -> list[Vertex]:
        """Canonical vertex order of a simplex (lexicographic)."""
        return sorted(s)

    # complexes --------------------------------------------------------
    def complex(self, simplices: Iterable[frozenset]) -> SubComplex:
        """Face closure of the given polysimplices."""
        out = set()
        for s in simplices:
            s = frozenset(s)
            if s in out:
                continue
            out.update(self.faces(s))
        return SubComplex(self, frozenset(out))

    def induced(self, vertices: Iterable[Vertex], budget: int = DEFAULT_BUDGET) -> SubComplex:
        """All polysimplices whose vertices lie in the given set."""
        vset = set(vertices)
        out = set()
        if self.irreducible:
            for s in self._cliques(vset):
                out.add(s)
                if len(out) > budget:
                    raise BudgetExceeded(f"more than {budget} polysimplices")
            return SubComplex(self, frozenset(out))
        block_sets = []
        for b in range(len(self.factors)):
            proj = {self.project(v, b) for v in vset}
            sub = Apartment(self.factors[b])
            block_sets.append(list(sub._cliques(proj)))
        for combo in itertools.product(*block_sets):
            s = frozenset(self.join(c) for c in itertools.product(*[sorted(x) for x in combo]))
            if s <= vset:
                out.add(s)
                if len(out) > budget:
                    raise BudgetExceeded(f"more than {budget} polysimplices")
        return SubComplex(self, frozenset(out))

    def _cliques(self, vset: set) -> Iterator[frozenset]:
        """Cliques of the adjacency graph restricted to an irreducible vertex set."""
        nbrs = {v: [w for w in self.neighbors(v) if w in vset and w > v] for v in vset}

        def extend(current: list, cands: list):
            yield frozenset(current)
            for idx, w in enumerate(cands):
                new = [u for u in cands[idx + 1:] if self.adjacent(u, w)]
                yield from extend(current + [w], new)

        for v in sorted(vset):
            yield from extend([v], sorted(nbrs[v]))

    def enumerate_box(self, lo: Sequence[int], hi: Sequence[int],
                      budget: int = DEFAULT_BUDGET) -> SubComplex:
        """All polysimplices whose vertices have canonical coordinates in the box."""
        if len(lo) != self.d or len(hi) != self.d:
            raise ApartmentError("box bounds need d coordinates")
        if any(a > b for a, b in zip(lo, hi)):
            raise ApartmentError("empty box: lo > hi")
        ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
        count = 1
        for r in ranges:
            count *= len(r)
        if count > budget:
            raise BudgetExceeded(f"box has {count} lattice points")
        verts = set()
        for c in itertools.product(*ranges):
            v = tuple(c)
            if self.vertex(v) == v:
                verts.add(v)
        return self.induced(verts, budget)

    # hulls ------------------------------------------------------------
    def hull_bounds(self, points: Iterable[Vertex]) -> dict[tuple[int, int], int]:
        """For each ordered pair (i, j) in one block: min of p_i - p_j over the points.

        The affine roots x_i - x_j - k that are nonnegative on all points are
        exactly those with k <= this minimum.
        """
        pts = list(points)
        if not pts:
            raise ApartmentError("hull of nothing")
        out = {}
        for b in self.blocks():
            for i in b:
                for j in b:
                    if i != j:
                        out[(i, j)] = min(p[i] - p[j] for p in pts)
        return out

    @staticmethod
    def satisfies(v: Sequence, bounds: dict[tuple[int, int], int]) -> bool:
        for (i, j), m in bounds.items():
            if v[i] - v[j] < m:
                return False
        return True

    def in_hull(self, target: Iterable[Vertex], *pieces: Iterable[Vertex]) -> bool:
        """Whether a polysimplex (given by vertices) lies in the hull of the pieces."""
        pts = [v for p in pieces for v in p]
        bounds = self.hull_bounds(pts)
        return all(self.satisfies(v, bounds) for v in target)

    def hull_vertices(self, *pieces: Iterable[Vertex]) -> list[Vertex]:
        pts = [v for p in pieces for v in p]
        bounds = self.hull_bounds(pts)
        ranges = []
        for b in self.blocks():
            last = b[-1]
            for i in b:
                if i == last:
                    ranges.append(range(0, 1))
                else:
                    ranges.append(range(bounds[(i, last)], -bounds[(last, i)] + 1))
        out = []
        for c in itertools.product(*ranges):
            if self.satisfies(c, bounds):
                out.append(tuple(c))
        return sorted(out)

    def hull(self, *pieces: Iterable[Vertex]) -> SubComplex:
        """Polysimplices on which every affine root nonnegative on the pieces is nonnegative.

        A polysimplex lies in a closed half-space iff its vertices do, so the
        hull is the complex induced on its vertex set.
        """
        return self.induced(self.hull_vertices(*pieces))

    def hull_complex(self, s: frozenset, t: frozenset) -> SubComplex:
        return self.hull(s, t)

    # convexity ----------------------------------------------------------
    def convex_witness(self, sigma: SubComplex):
        """None if convex, otherwise (s, t, omega) with omega in hull(s, t) but not in sigma.

        Hulls are monotone in their arguments, so it suffices to test pairs
        of maximal members.
        """
        maxi = sigma.maximal()
        vset = set(sigma.vertices())
        # hulls are induced complexes, so once every hull vertex lies in sigma
        # the only possible misses are cliques of sigma's vertices that sigma lacks
        gaps = [om for om in self.induced(vset).sorted_simplices() if om not in sigma.simplices]
        for a, s in enumerate(maxi):
            for t in maxi[a:]:
                bounds = self.hull_bounds(list(s) + list(t))
                hv = self.hull_vertices(s, t)
                missing = [v for v in hv if v not in vset]
                if missing:
                    return (s, t, frozenset([missing[0]]))
                for om in gaps:
                    if all(self.satisfies(v, bounds) for v in om):
                        return (s, t, om)
        return None

    def is_convex(self, sigma: SubComplex) -> bool:
        return self.convex_witness(sigma) is None

    def brute_hull_vertices(self, *pieces: Iterable[Vertex]) -> list[Vertex]:
        """Hull vertices by listing explicit affine roots and testing each one.

        This does not use the closed-form bounds: for each (i, j) it scans a
        range of offsets k, keeps the roots nonnegative on every input point,
        and keeps the candidate vertices in the bounding box on which all
        kept roots are nonnegative.
        """
        pts = np.array([v for p in pieces for v in p], dtype=np.int64)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        # every difference x_i - x_j of a point in the box lies within +-reach
        reach = 2 * int(np.abs(np.concatenate([lo, hi])).max()) + 1
        offsets = np.arange(-reach, reach + 1, dtype=np.int64)
        I, J = self._ordered_pairs()
        # kept[p, k]: the root x_I[p] - x_J[p] - offsets[k] is >= 0 at every input point
        diffs = pts[:, I] - pts[:, J]
        kept = ((diffs[:, :, None] - offsets[None, None, :]) >= 0).all(axis=0)
        cand = self._grid(tuple(lo.tolist()), tuple(hi.tolist()))
        values = cand[:, I] - cand[:, J]
        ok = ((values[:, :, None] - offsets[None, None, :]) >= 0) | ~kept[None, :, :]
        keep = ok.all(axis=(1, 2))
        return sorted(tuple(int(c) for c in row) for row in cand[keep])

    def _ordered_pairs(self):
        pairs = [(i, j) for b in self.blocks() for i in b for j in b if i != j]
        return (np.array([i for i, _ in pairs], dtype=np.int64),
                np.array([j for _, j in pairs], dtype=np.int64))

    def _grid(self, lo: tuple, hi: tuple) -> np.ndarray:
        """Canonical lattice points of a coordinate box as an integer array."""
        axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
        grids = np.meshgrid(*axes, indexing="ij")
        cand = np.stack([g.ravel() for g in grids], axis=1)
        keep = np.ones(len(cand), dtype=bool)
        for b in self.blocks():
            keep &= cand[:, b[-1]] == 0
        return cand[keep]

    def convex_closure(self, sigma: SubComplex, budget: int = DEFAULT_BUDGET) -> SubComplex:
        """Smallest convex subcomplex containing sigma, by fixed-point iteration.

        Each round adds the brute-force hull of every pair of maximal members
        not yet examined, until nothing changes.
        """
        current = set(sigma.vertices())
        done: set = set()
        cx = self.induced(current, budget) if current else sigma
        cx = cx.union(sigma)
        while True:
            maxi = cx.maximal()
            added = set()
            for a, s in enumerate(maxi):
                for t in maxi[a:]:
                    key = (s, t)
                    if key in done:
                        continue
                    done.add(key)
                    for v in self.brute_hull_vertices(s, t):
                        if v not in current:
                            added.add(v)
            if not added:
                break
            current |= added
            cx = self.induced(current, budget).union(sigma)
        return cx

    # admissibility ----------------------------------------------------
    def chambers_at(self, v: Vertex) -> list[frozenset]:
        """All chambers containing v."""
        parts = []
        for b in range(len(self.factors)):
            n = self.factors[b]
            base = list(self.project(v, b))
            chs = []
            for perm in itertools.permutations(range(n)):
                cur = list(base)
                verts = [tuple(c - cur[-1] for c in cur)]
                for t in perm[:-1]:
                    cur[t] += 1
                    verts.append(tuple(c - cur[-1] for c in cur))
                chs.append(sorted(verts))
            parts.append(chs)
        out = set()
        for combo in itertools.product(*parts):
            out.add(frozenset(self.join(c) for c in itertools.product(*combo)))
        return sorted(out, key=sorted)

    def admissibility_witness(self, sigma: SubComplex):
        """None if admissible; otherwise a tuple naming the failed condition."""
        vset = set(sigma.vertices())
        simp = sigma.simplices
        seen = set()
        for v in sigma.vertices():
            for ch in self.chambers_at(v):
                if ch in seen:
                    continue
                seen.add(ch)
                faces = self.faces(ch) if not self.irreducible else [ch]
                for tau in faces:
                    meet = frozenset(u for u in tau if u in vset)
                    if not meet:
                        continue
                    if meet not in simp:
                        return ("condition-1", tau, meet)
        for x in sigma.vertices():
            xs = frozenset([x])
            for tau in sigma.sorted_simplices():
                if tau == xs:
                    continue
                if any(self.in_hull(tau, xs, om) for om in self.proper_faces(tau)):
                    continue
                bounds = self.hull_bounds(list(tau) + [x])
                ok = False
                for rho in simp:
                    if tau < rho and all(self.satisfies(u, bounds) for u in rho):
                        ok = True
                        break
                if not ok:
                    return ("condition-2", x, tau)
        return None

    def is_admissible(self, sigma: SubComplex) -> bool:
        return self.admissibility_witness(sigma) is None

    # minimal face / maximal cone ----------------------------------------
    def minimal_face(self, x: Vertex, sigma: frozenset) -> frozenset:
        """The unique minimal face tau of sigma with sigma in hull(x, tau).

        Per factor: choose a chamber containing sigma, reflect it across each
        wall that contains sigma and has x strictly on its negative side
        (smallest root first), then keep the vertices of sigma whose
        opposite wall neither contains sigma nor has x strictly positive.
        """
        if self.irreducible:
            return _minimal_face_irreducible(x, frozenset(sigma))
        parts = []
        for b in range(len(self.factors)):
            xs = self.project(x, b)
            ss = frozenset(self.project(v, b) for v in sigma)
            parts.append(sorted(_minimal_face_irreducible(xs, ss)))
        return frozenset(self.join(c) for c in itertools.product(*parts))

    def maximal_cone(self, x: Vertex, tau: frozenset) -> tuple[frozenset, frozenset | None]:
        """The unique maximal sigma in hull(x, tau) containing tau.

        Returns (sigma, omega) where omega is a proper face of tau with tau in
        hull(x, omega) when sigma == tau and tau is not the vertex x itself,
        and None otherwise.
        """
        tau = frozenset(tau)
        bounds = self.hull_bounds(list(tau) + [x])
        cands = None
        for v in tau:
            nb = set(self.neighbors(v))
            cands = nb if cands is None else cands & nb
        extra = sorted(w for w in (cands or set()) if w not in tau and self.satisfies(w, bounds))
        grown = set(tau) | set(extra)
        sigma = self.span(grown)
        if not all(self.satisfies(w, bounds) for w in sigma):
            raise ApartmentError("maximal cone left the hull (should not happen)")
        omega = None
        if sigma == tau and tau != frozenset([x]):
            for om in self.proper_faces(tau):
                if self.in_hull(tau, [x], om):
                    omega = om
                    break
        return sigma, omega

    # points and carriers ------------------------------------------------
    def barycenter(self, s: frozenset) -> tuple[Fraction, ...]:
        """A rational interior point of s (average of lifted vertices per factor)."""
        out: list[Fraction] = []
        for b in range(len(self.factors)):
            part = sorted(self.factor_parts(s)[b])
            lifts = _lift_chain(part)
            n = len(lifts)
            out.extend(sum((Fraction(l[c]) for l in lifts), Fraction(0)) / n for c in range(len(part[0])))
        return tuple(out)

    def carrier(self, point: Sequence) -> frozenset:
        """The polysimplex containing a rational point in its relative interior."""
        parts = []
        for b in self.blocks():
            parts.append(sorted(_carrier_irreducible([Fraction(point[i]) for i in b])))
        return frozenset(self.join(c) for c in itertools.product(*parts))

    def segment_events(self, p: Sequence, q: Sequence) -> list[Fraction]:
        """Parameters t in [0, 1] where p + t(q - p) meets a wall x_i - x_j in Z."""
        ts = {Fraction(0), Fraction(1)}
        for b in self.blocks():
            for i, j in itertools.combinations(b, 2):
                a0 = Fraction(p[i]) - Fraction(p[j])
                a1 = Fraction(q[i]) - Fraction(q[j])
                slope = a1 - a0
                if slope == 0:
                    continue
                lo, hi = sorted((a0, a1))
                for n in range(floor(lo), floor(hi) + 2):
                    t = (n - a0) / slope
                    if 0 <= t <= 1:
                        ts.add(t)
        return sorted(ts)

    def segment_carriers(self, p: Sequence, q: Sequence) -> list[frozenset]:
        """Carriers along the segment: at each event and each open gap, deduplicated."""
        ts = self.segment_events(p, q)
        samples = []
        for a, b in zip(ts, ts[1:]):
            samples.append(a)
            samples.append((a + b) / 2)
        samples.append(ts[-1])
        out: list[frozenset] = []
        for t in samples:
            pt = [Fraction(pi) + t * (Fraction(qi) - Fraction(pi)) for pi, qi in zip(p, q)]
            c = self.carrier(pt)
            if not out or out[-1] != c:
                out.append(c)
        return out

    # paths --------------------------------------------------------------
    def vertex_path(self, sigma: frozenset, tau: frozenset, y: Vertex) -> list[Vertex]:
        """Vertices z_0 in tau, ..., z_m = y each adjacent to the next and inside the hull.

        z_0 is a vertex of tau with y in hull(sigma, z_0) (one exists because
        y is adjacent to sigma).  Each further step follows the straight
        segment from the current vertex towards y and moves to another vertex
        of the polysimplex carrying its initial open piece.  Product
        apartments are handled one factor at a time.
        """
        sigma, tau = frozenset(sigma), frozenset(tau)
        if not all(self.adjacent(y, v) for v in sigma):
            raise PreconditionViolated("y must be adjacent to sigma")
        if not self.in_hull([y], sigma, tau):
            raise PreconditionViolated("y must lie in hull(sigma, tau)")
        z0 = None
        # a vertex of tau equal to y gives the path of length zero
        for z in sorted(tau, key=lambda v: (v != y, v)):
            if self.in_hull([y], sigma, [z]):
                z0 = z
                break
        if z0 is None:
            raise ApartmentError("no starting vertex found although y is adjacent to sigma inside the hull")
        path = [z0]
        for b in range(len(self.factors)):
            cur = path[-1]
            target_block = self.project(y, b)
            sub = Apartment(self.factors[b])
            start = self.project(cur, b)
            steps = sub._greedy_geodesic(start, target_block)
            for st in steps[1:]:
                parts = [list(self.project(cur, c)) for c in range(len(self.factors))]
                parts[b] = list(st)
                path.append(self.join(parts))
        self.verify_vertex_path(sigma, tau, y, path)
        return path

    def _greedy_geodesic(self, start: Vertex, y: Vertex, max_steps: int = 10_000) -> list[Vertex]:
        out = [start]
        cur = start
        for _ in range(max_steps):
            if cur == y:
                return out
            ev = self.segment_events(cur, y)
            mid = ev[1] / 2
            pt = [Fraction(c) + mid * (Fraction(t) - Fraction(c)) for c, t in zip(cur, y)]
            om = self.carrier(pt)
            others = sorted(v for v in om if v != cur)
            bounds = self.hull_bounds([cur, y])
            # any other vertex of omega works; the one with the smallest hull
            # towards y is taken so that the choice is deterministic
            best = min(others, key=lambda v: (len(self.hull_vertices([v], [y])), v))
            if not self.satisfies(best, bounds):
                raise ApartmentError("geodesic step left the hull (should not happen)")
            out.append(best)
            cur = best
        raise ApartmentError("vertex path did not terminate")

    def verify_vertex_path(self, sigma, tau, y, path) -> None:
        if path[-1] != y or path[0] not in tau:
            raise ApartmentError("vertex path endpoints are wrong")
        if not self.in_hull([y], sigma, [path[0]]):
            raise ApartmentError("y not in hull(sigma, z_0)")
        for a, b in zip(path, path[1:]):
            if not self.adjacent(a, b) or a == b:
                raise ApartmentError(f"path step {a}->{b} is not an edge")
            if not self.in_hull([b], [y], [a]):
                raise ApartmentError(f"{b} not in hull(y, {a})")
            if not self.in_hull([y], sigma, [b]):
                raise ApartmentError(f"y not in hull(sigma, {b})")

    def simplex_path(self, sigma: frozenset, tau: frozenset, omega: frozenset) -> list[frozenset]:
        """Polysimplices tau = tau_0, ..., tau_m = omega each a face or coface step inside the hull.

        Traces the straight segment between the barycenters of tau and omega
        and records the carrying polysimplex at every event and open gap.
        """
        sigma, tau, omega = frozenset(sigma), frozenset(tau), frozenset(omega)
        if not self.in_hull(omega, sigma, tau):
            raise PreconditionViolated("omega must lie in hull(sigma, tau)")
        path = self.segment_carriers(self.barycenter(tau), self.barycenter(omega))
        if path[0] != tau or path[-1] != omega:
            raise ApartmentError("segment carriers do not start at tau and end at omega")
        self.verify_simplex_path(sigma, tau, omega, path)
        return path

    def verify_simplex_path(self, sigma, tau, omega, path) -> None:
        if path[0] != tau or path[-1] != omega:
            raise ApartmentError("simplex path endpoints are wrong")
        for i, (a, b) in enumerate(zip(path, path[1:]), start=1):
            if not (a < b or b < a):
                raise ApartmentError(f"step {i} is neither a face nor a coface step")
            if not self.in_hull(b, omega, a):
                raise ApartmentError(f"tau_{i} not in hull(omega, tau_{i - 1})")
            if not self.in_hull(omega, sigma, b):
                raise ApartmentError(f"omega not in hull(sigma, tau_{i})")

    # half-spaces --------------------------------------------------------
    def halfspace_split(self, sigma: SubComplex, root: AffineRoot):
        """(Sigma_+, Sigma_-, Sigma_0): members on which the root is >= 0, <= 0, = 0."""
        plus, minus, zero = set(), set(), set()
        for s in sigma.simplices:
            vals = [eval_root(root, v) for v in s]
            if all(v >= 0 for v in vals):
                plus.add(s)
            if all(v <= 0 for v in vals):
                minus.add(s)
            if all(v == 0 for v in vals):
                zero.add(s)
        return (SubComplex(self, frozenset(plus)), SubComplex(self, frozenset(minus)),
                SubComplex(self, frozenset(zero)))

    def roots(self) -> list[tuple[int, int]]:
        return [(i, j) for b in self.blocks() for i in b for j in b if i < j]


# ---------------------------------------------------------------------------
# irreducible helpers (single block, last coordinate normalized)


def _normalize(v: Sequence[int]) -> Vertex:
    last = v[-1]
    return tuple(int(c - last) for c in v)


def _lift_chain(vertices: Sequence[Vertex]) -> list[tuple[int, ...]]:
    """Lift the vertices of a simplex to a chain b = l_0 < l_1 < ... with 0/1 steps."""
    vs = sorted(vertices)
    base = vs[0]
    lifts = []
    for w in vs:
        diff = [a - b for a, b in zip(w, base)]
        m = min(diff)
        lifts.append(tuple(b + (dd - m) for b, dd in zip(base, diff)))
    lifts.sort(key=lambda l: sum(a - b for a, b in zip(l, base)))
    return lifts


def _carrier_irreducible(point: Sequence[Fraction]) -> frozenset:
    fl = [floor(c) for c in point]
    fr = [c - f for c, f in zip(point, fl)]
    levels = sorted({f for f in fr if f > 0}, reverse=True)
    verts = {_normalize(fl)}
    for t in levels:
        verts.add(_normalize([f + (1 if q >= t else 0) for f, q in zip(fl, fr)]))
    return frozenset(verts)


class _Chamber:
    """A chamber as base vertex plus permutation: v_m = base + e_{pi(0)} + ... + e_{pi(m-1)}."""

    def __init__(self, base: Sequence[int], perm: Sequence[int]):
        self.base = list(base)
        self.perm = list(perm)
        self.n = len(perm)

    def vertices(self) -> list[tuple[int, ...]]:
        out = []
        cur = list(self.base)
        out.append(tuple(cur))
        for t in self.perm[:-1]:
            cur[t] += 1
            out.append(tuple(cur))
        return out

    def wall(self, m: int) -> AffineRoot:
        """Simple root m; it vanishes on every vertex except v_m."""
        p, b = self.perm, self.base
        if m == 0:
            i, j = p[-1], p[0]
            return AffineRoot(i, j, b[i] - b[j] - 1)
        i, j = p[m - 1], p[m]
        return AffineRoot(i, j, b[i] - b[j])

    def reflect(self, m: int) -> "_Chamber":
        """Reflect across wall m: v_m becomes v_{m-1} + v_{m+1} - v_m (indices cyclic)."""
        p = list(self.perm)
        if m == 0:
            base = list(self.base)
            base[p[0]] += 1
            base[p[-1]] -= 1
            return _Chamber(base, [p[-1]] + p[1:-1] + [p[0]])
        p[m - 1], p[m] = p[m], p[m - 1]
        return _Chamber(self.base, p)


def _chamber_containing(sigma: frozenset) -> _Chamber:
    lifts = _lift_chain(sorted(sigma))
    n = len(lifts[0])
    base = list(lifts[0])
    perm: list[int] = []
    prev = lifts[0]
    for nxt in lifts[1:] + [tuple(c + 1 for c in lifts[0])]:
        step = sorted(i for i in range(n) if nxt[i] != prev[i])
        perm.extend(step)
        prev = nxt
    return _Chamber(base, perm)


def _minimal_face_irreducible(x: Vertex, sigma: frozenset) -> frozenset:
    ch = _chamber_containing(sigma)
    n = ch.n
    for _ in range(10_000):
        walls = [ch.wall(m) for m in range(n)]
        bad = []
        for m, r in enumerate(walls):
            on_wall = all(eval_root(r, v) == 0 for v in sigma)
            if on_wall and eval_root(r, x) < 0:
                bad.append((tuple(r), m))
        if not bad:
            break
        _, m = min(bad)
        ch = ch.reflect(m)
        if not sigma <= frozenset(_normalize(v) for v in ch.vertices()):
            raise ApartmentError("reflected chamber lost sigma")
    else:
        raise ApartmentError("chamber reflection did not terminate")
    verts = [_normalize(v) for v in ch.vertices()]
    keep = []
    for m, r in enumerate(ch.wall(k) for k in range(n)):
        on_wall = all(eval_root(r, v) == 0 for v in sigma)
        if eval_root(r, x) > 0 or on_wall:
            continue
        keep.append(verts[m])
    if not keep:
        # only sigma = {x} has the empty face as its minimal face
        return sigma
    return frozenset(keep)
