"""Seeded random instances, brute-force oracles and the verification batteries.

Randomness comes from numpy's counter-based Philox generator.  A battery
is identified by the algorithm name, the seed and a stream label, so the
same instances are produced on every run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .apartment import AffineRoot, Apartment, SubComplex, Vertex
from .building import standard_vertex
from .characters import equivariance_defect, hecke_trace, lefschetz_sum
from .complexes import (ModuleWithIdempotents, additivity_report, assemble_chain, check_corner_fullness,
                        check_serre_closure, mayer_vietoris, orient, quotient_module, separating_roots,
                        stabilization, submodule, verify_resolution)
from .idempotents import (FiniteGroupModel, IdempotentSystem, averaging_idempotent, check_dplus_group,
                          check_group_consistency, check_idempotent_consistency, congruence_subgroup,
                          diagonal_model, general_linear_generators, group_model, monomial_group,
                          product_set, stabilizer, support_projection, support_projection_report)
from .linalg import QMatrix
from .report import Report

RNG_ALGORITHM = "Philox4x64-10"

STREAMS = {"hull": 1, "lemmas": 2, "support": 3, "serre": 4, "stabilization": 5, "characters": 6,
           "splits": 7}


def make_rng(seed: int, stream: str) -> np.random.Generator:
    """Independent generator for one battery, split from the seed by stream label."""
    ss = np.random.SeedSequence(seed, spawn_key=(STREAMS[stream],))
    return np.random.Generator(np.random.Philox(ss))


def rng_header(seed: int) -> dict:
    return {"algorithm": RNG_ALGORITHM, "seed": seed}


# ---------------------------------------------------------------------------
# random geometry


def random_vertex(A: Apartment, rng: np.random.Generator, side: int) -> Vertex:
    coords = []
    for b in A.blocks():
        coords.extend(int(rng.integers(0, side + 1)) for _ in b[:-1])
        coords.append(0)
    return A.vertex(coords)


def random_polysimplex(A: Apartment, rng: np.random.Generator, side: int) -> frozenset:
    v = random_vertex(A, rng, side)
    chambers = A.chambers_at(v)
    ch = chambers[int(rng.integers(len(chambers)))]
    faces = A.faces(ch)
    return faces[int(rng.integers(len(faces)))]


def brute_minimal_face(A: Apartment, x: Vertex, sigma: frozenset) -> frozenset:
    """The inclusion-minimal faces tau of sigma with sigma in hull(x, tau); must be unique."""
    good = [t for t in A.faces(sigma) if A.in_hull(sigma, [x], t)]
    minimal = [t for t in good if not any(o < t for o in good)]
    if len(minimal) != 1:
        raise AssertionError(f"minimal face is not unique: {minimal}")
    return minimal[0]


def brute_maximal_cone(A: Apartment, x: Vertex, tau: frozenset) -> frozenset:
    """The inclusion-maximal polysimplices of the star of tau inside hull(x, tau)."""
    v = next(iter(tau))
    star = set()
    for ch in A.chambers_at(v):
        if tau <= ch:
            star.update(f for f in A.faces(ch) if tau <= f)
    good = [s for s in star if A.in_hull(s, [x], tau)]
    maximal = [s for s in good if not any(s < o for o in good)]
    if len(maximal) != 1:
        raise AssertionError(f"maximal cone is not unique: {maximal}")
    return maximal[0]


def random_admissible(A: Apartment, rng: np.random.Generator, lo, hi, min_vertices: int = 3,
                      max_vertices: int = 12, max_tries: int = 5000) -> SubComplex:
    """Induced subcomplex on a random vertex subset of a box, retried until admissible."""
    box = A.enumerate_box(lo, hi).vertices()
    for _ in range(max_tries):
        k = int(rng.integers(min_vertices, min(max_vertices, len(box)) + 1))
        idx = rng.choice(len(box), size=k, replace=False)
        S = A.induced([box[i] for i in sorted(idx)])
        if A.is_admissible(S):
            return S
    raise RuntimeError("no admissible subcomplex found")


def random_convex_supports(A: Apartment, rng: np.random.Generator, lo, hi, count: int) -> list[SubComplex]:
    """Hulls of random vertex pairs in a box (convex by construction)."""
    box = A.enumerate_box(lo, hi).vertices()
    out = []
    for _ in range(count):
        a, b = box[int(rng.integers(len(box)))], box[int(rng.integers(len(box)))]
        out.append(A.hull([a], [b]))
    return out


@dataclass
class DiagonalInstance:
    sigma: SubComplex
    supports: list[SubComplex]
    system: IdempotentSystem


def diagonal_battery_instances(seed: int, count: int, min_supports: int = 8) -> list[DiagonalInstance]:
    """Admissible Ã2 subcomplexes of the box [0,3]^2 with diagonal models on [-1,4]^2."""
    rng = make_rng(seed, "support")
    A = Apartment(3)
    out = []
    for k in range(count):
        if k % 5 == 4:
            # every fifth instance is a convex closure of random vertices
            verts = [random_vertex(A, rng, 3) for _ in range(int(rng.integers(2, 4)))]
            S = A.convex_closure(A.induced(verts))
        else:
            S = random_admissible(A, rng, (0, 0, 0), (3, 3, 0), min_vertices=4)
        n = int(rng.integers(min_supports, min_supports + 5))
        supports = random_convex_supports(A, rng, (-1, -1, 0), (4, 4, 0), n)
        out.append(DiagonalInstance(S, supports, diagonal_model(S, supports)))
    return out


def admissible_splits(inst: DiagonalInstance) -> list[AffineRoot]:
    """Separating roots for which the positive, negative and zero parts stay admissible."""
    A = inst.sigma.apartment
    out = []
    for root in separating_roots(inst.sigma):
        parts = A.halfspace_split(inst.sigma, root)
        if all(len(p) and A.is_admissible(p) for p in parts):
            out.append(root)
    return out


# ---------------------------------------------------------------------------
# criterion batteries


def counterexample_a3() -> Report:
    """The Ã3 configuration where no vertex of [z1, z2] has y in its hull with x."""
    A = Apartment(4)
    x, y, z1, z2 = (0, 0, 0, 0), (4, 2, 2, 0), (4, 2, 1, 0), (4, 3, 2, 0)
    edge = frozenset([z1, z2])
    rep = Report()
    rep.add("z1 and z2 are adjacent", A.adjacent(z1, z2))
    rep.add("y lies in hull(x, [z1, z2])", A.in_hull([y], [x], edge))
    rep.add("y does not lie in hull(x, z1)", not A.in_hull([y], [x], [z1]))
    rep.add("y does not lie in hull(x, z2)", not A.in_hull([y], [x], [z2]))
    # the closed descriptions, coordinates (v0, v1, v2, v3) with v3 = 0
    box = [(a, b, c, 0) for a in range(0, 6) for b in range(0, 6) for c in range(0, 6)]

    def positive(v):
        return v[0] >= v[1] >= v[2] >= v[3]

    descriptions = {
        "hull(x, z1)": (lambda v: positive(v) and v[0] <= v[1] + 2 <= v[2] + 3 <= v[3] + 4, [[x], [z1]]),
        "hull(x, z2)": (lambda v: positive(v) and v[0] <= v[1] + 1 <= v[2] + 2 <= v[3] + 4, [[x], [z2]]),
        "hull(x, [z1, z2])": (lambda v: positive(v) and v[0] <= v[1] + 2 <= v[2] + 3 <= v[3] + 5
                              and v[0] <= v[3] + 4, [[x], edge]),
    }
    for name, (pred, pieces) in descriptions.items():
        described = sorted(v for v in box if pred(v))
        computed = A.hull_vertices(*pieces)
        oracle = A.brute_hull_vertices(*pieces)
        ok = described == computed == oracle
        rep.add(f"inequalities for {name} match the computed vertex set", ok,
                None if ok else {"described": described, "computed": computed})
    rep.add("hull(x, z1) has 12 vertices", len(A.hull_vertices([x], [z1])) == 12)
    return rep


def hull_battery(seed: int, count: int = 100, sides: tuple[int, int] = (6, 4)) -> Report:
    """Half-space hull against the iterative convex closure on random polysimplex pairs.

    Pairs alternate between Ã2 and Ã3; ``sides`` gives the box side for each.
    """
    rng = make_rng(seed, "hull")
    rep = Report()
    failures = []
    apartments = [Apartment(3), Apartment(4)]
    for k in range(count):
        A, side = apartments[k % 2], sides[k % 2]
        s = random_polysimplex(A, rng, side)
        t = random_polysimplex(A, rng, side)
        h = A.hull(s, t)
        c = A.convex_closure(A.complex([s, t]))
        if h != c:
            failures.append({"apartment": list(A.factors), "sigma": s, "tau": t})
    rep.add(f"hull equals convex closure on {count} pairs", not failures, failures[:3] or None)
    return rep


def lemma_battery(seed: int, count: int = 200, side: int = 4) -> Report:
    """minimal_face, maximal_cone and both path constructions against brute force."""
    rng = make_rng(seed, "lemmas")
    apartments = [Apartment(3), Apartment(4), Apartment((2, 2)), Apartment((3, 2))]
    bad = {"minimal_face": [], "maximal_cone": [], "vertex_path": [], "simplex_path": []}
    paths_done = {"vertex_path": 0, "simplex_path": 0}
    for k in range(count):
        A = apartments[k % len(apartments)]
        x = random_vertex(A, rng, side)
        sigma = random_polysimplex(A, rng, side)
        if A.minimal_face(x, sigma) != brute_minimal_face(A, x, sigma):
            bad["minimal_face"].append({"x": x, "sigma": sigma})
        tau = random_polysimplex(A, rng, side)
        cone, omega = A.maximal_cone(x, tau)
        ok = cone == brute_maximal_cone(A, x, tau)
        if omega is not None:
            ok = ok and omega < tau and A.in_hull(tau, [x], omega)
        elif cone == tau and tau != frozenset([x]):
            ok = False
        if not ok:
            bad["maximal_cone"].append({"x": x, "tau": tau})
        # vertex path: y adjacent to sigma inside hull(sigma, tau)
        cands = [y for y in A.hull_vertices(sigma, tau) if all(A.adjacent(y, v) for v in sigma)]
        if cands:
            y = cands[int(rng.integers(len(cands)))]
            try:
                A.verify_vertex_path(sigma, tau, y, A.vertex_path(sigma, tau, y))
                paths_done["vertex_path"] += 1
            except Exception as exc:  # report any failure with its instance
                bad["vertex_path"].append({"sigma": sigma, "tau": tau, "y": y, "error": str(exc)})
        hull = A.hull(sigma, tau).sorted_simplices()
        om = hull[int(rng.integers(len(hull)))]
        try:
            A.verify_simplex_path(sigma, tau, om, A.simplex_path(sigma, tau, om))
            paths_done["simplex_path"] += 1
        except Exception as exc:
            bad["simplex_path"].append({"sigma": sigma, "tau": tau, "omega": om, "error": str(exc)})
    rep = Report()
    rep.add(f"minimal_face matches brute force on {count} instances", not bad["minimal_face"],
            bad["minimal_face"][:3] or None)
    rep.add(f"maximal_cone matches brute force on {count} instances", not bad["maximal_cone"],
            bad["maximal_cone"][:3] or None)
    for name in ("vertex_path", "simplex_path"):
        rep.add(f"{name} verifies on {paths_done[name]} instances", not bad[name], bad[name][:3] or None)
    return rep


def support_battery(instances: Sequence[DiagonalInstance], min_splits: int = 20) -> Report:
    """Support projection properties, then additivity and separation on admissible splits."""
    rep = Report()
    bad = []
    for k, inst in enumerate(instances):
        u = support_projection(inst.system, inst.sigma, verify=False)
        sp = support_projection_report(inst.system, inst.sigma, u)
        if not sp.passed:
            bad.append({"instance": k, "failed": [c.name for c in sp.failures()]})
    rep.add(f"support projection properties on {len(instances)} complexes", not bad, bad[:3] or None)
    splits, bad = 0, []
    for k, inst in enumerate(instances):
        for root in admissible_splits(inst):
            r = additivity_report(inst.system, inst.sigma, root)
            splits += 1
            if not r.passed:
                bad.append({"instance": k, "root": tuple(root), "failed": [c.name for c in r.failures()]})
    rep.add(f"additivity and separation on {splits} splits", not bad and splits >= min_splits,
            {"splits": splits, "failures": bad[:3]} if bad or splits < min_splits else None)
    return rep


def exactness_battery(instances: Sequence[DiagonalInstance]) -> Report:
    rep = Report()
    bad = []
    for k, inst in enumerate(instances):
        r = verify_resolution(inst.system, inst.sigma, check_admissible=False)
        if not r.passed:
            bad.append({"instance": k, "failed": [c.name for c in r.failures()]})
    rep.add(f"resolution checks on {len(instances)} complexes", not bad, bad[:3] or None)
    return rep


def mayer_vietoris_battery(instances: Sequence[DiagonalInstance], min_splits: int = 20) -> Report:
    rep = Report()
    splits, bad = 0, []
    for k, inst in enumerate(instances):
        for root in admissible_splits(inst):
            r = mayer_vietoris(inst.system, inst.sigma, root)
            splits += 1
            if not r.passed:
                bad.append({"instance": k, "root": tuple(root), "failed": [c.name for c in r.failures()]})
    rep.add(f"Mayer-Vietoris bookkeeping on {splits} splits", not bad and splits >= min_splits,
            {"splits": splits, "failures": bad[:3]} if bad or splits < min_splits else None)
    return rep


def random_serre_triple(inst: DiagonalInstance, rng: np.random.Generator):
    """A compatible short exact sequence built from the diagonal module.

    V2 is the diagonal module; a random invertible matrix commuting with all
    e_x (block diagonal on coordinates with equal membership pattern) moves
    a random coordinate subspace to V1, and V3 is the quotient.
    """
    E, S = inst.system, inst.sigma
    n = E.dim
    verts = S.vertices()
    ops = {x: E.e(x) for x in verts}
    pattern = [tuple(int(E.e(x)[i, i]) for x in verts) for i in range(n)]
    blocks: dict = {}
    for i, pat in enumerate(pattern):
        blocks.setdefault(pat, []).append(i)
    T = {}
    for idx in blocks.values():
        while True:
            block = [[Fraction(int(rng.integers(-3, 4))) for _ in idx] for _ in idx]
            if linalg.rank(QMatrix.from_dense(block)) == len(idx):
                break
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                if block[a][b]:
                    T.setdefault(i, {})[j] = block[a][b]
    Tm = QMatrix(n, n, T)
    chosen = sorted(int(i) for i in rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False))
    basis = QMatrix.from_columns([Tm.column(i) for i in chosen], n) if chosen else QMatrix(n, 0)
    V2 = ModuleWithIdempotents(n, ops)
    V1, inc = submodule(V2, basis)
    V3, proj = quotient_module(V2, basis)
    return V1, V2, V3, inc, proj


def serre_battery(instances: Sequence[DiagonalInstance], seed: int, count: int = 20) -> Report:
    rng = make_rng(seed, "serre")
    rep = Report()
    bad = []
    for k in range(count):
        inst = instances[k % len(instances)]
        V1, V2, V3, inc, proj = random_serre_triple(inst, rng)
        r = check_serre_closure(inst.sigma, V1, V2, V3, inc, proj)
        if not r.passed:
            bad.append({"instance": k, "witness": r.checks[0].witness})
    rep.add(f"hereditary implications on {count} triples", not bad, bad[:3] or None)
    return rep


def stabilization_battery(seed: int) -> Report:
    """Nested Ã2 boxes with a diagonal model, and nested segments in every group model."""
    rng = make_rng(seed, "stabilization")
    A = Apartment(3)
    boxes = [((1, 1, 0), (2, 2, 0)), ((0, 0, 0), (3, 3, 0)), ((-1, -1, 0), (4, 4, 0))]
    chain = [A.enumerate_box(lo, hi) for lo, hi in boxes]
    rep = Report()
    for trial in range(3):
        supports = random_convex_supports(A, rng, (-2, -2, 0), (5, 5, 0), 10)
        E = diagonal_model(chain[-1], supports)
        rep.extend(stabilization(E, chain), prefix=f"diagonal boxes {trial}: ")
    for p, r in ((2, 0), (2, 1), (3, 0), (3, 1)):
        ref = reference_model(p, r)
        A1 = ref.apartment
        segs = [A1.induced([(0, 0)]), A1.induced([(0, 0), (1, 0)])]
        if r == 1:
            segs.append(A1.induced([(-1, 0), (0, 0), (1, 0)]))
        rep.extend(stabilization(ref.system, segs), prefix=f"group p={p} r={r}: ")
    return rep


# ---------------------------------------------------------------------------
# the reference group model


@dataclass
class ReferenceModel:
    p: int
    r: int
    M: int
    space: str
    apartment: Apartment
    sigma: SubComplex
    model: FiniteGroupModel
    system: IdempotentSystem
    K: dict
    info: dict = field(default_factory=dict)


def reference_segment(r: int) -> list[Vertex]:
    """Segment of length r+1 in the standard apartment of the tree containing the standard vertex."""
    return [(0, 0), (1, 0)] if r == 0 else [(-1, 0), (0, 0), (1, 0)]


def reference_model(p: int, r: int, space: str = "projective", M: int | None = None,
                    budget: int = 1_000_000) -> ReferenceModel:
    if r not in (0, 1):
        raise ValueError("the reference segment is defined for r in {0, 1}")
    M = r + 2 if M is None else M
    A = Apartment(2)
    S = A.induced(reference_segment(r))
    model = FiniteGroupModel(2, p, M, space)
    E, K = group_model(model, S, r, monomial_group(model), budget=budget)
    return ReferenceModel(p, r, M, space, A, S, model, E, K)


def group_model_report(ref: ReferenceModel) -> Report:
    """Group consistency, idempotent consistency, resolution and the edge average."""
    rep = Report()
    syms = [(g.element, g.vertex_map) for g in ref.system.symmetries]
    rep.extend(check_group_consistency(ref.K, ref.sigma, ref.model.q, syms))
    rep.extend(check_idempotent_consistency(ref.system, ref.sigma))
    rep.extend(verify_resolution(ref.system, ref.sigma))
    bad = None
    for s in ref.sigma.by_dimension().get(1, []):
        x, y = sorted(s)
        prod = sorted(product_set(ref.K[x], ref.K[y], ref.model.q))
        if averaging_idempotent(prod, ref.model) != ref.system.e_simplex(s):
            bad = s
    rep.add("edge idempotent equals the average over K_x K_y", bad is None, bad)
    U = congruence_subgroup(standard_vertex(2, ref.p), ref.r, ref.M)
    rep.extend(check_dplus_group(U, ref.p, ref.M, 2), prefix="D+ ")
    return rep


def character_report(ref: ReferenceModel, seed: int, random_elements: int = 20) -> Report:
    """Lefschetz equality for every stabilizing symmetry and Euler checks for random f."""
    rng = make_rng(seed, "characters")
    E, S = ref.system, ref.sigma
    oc = orient(S)
    ca = assemble_chain(E, oc)
    u = support_projection(E, S)
    stab = stabilizer(E, S)
    rep = Report()
    bad = [g.label for g in stab if not lefschetz_sum(E, oc, S, g, ca, u).equal]
    rep.add(f"Lefschetz sum equals ambient trace for {len(stab)} stabilizing symmetries", not bad, bad[:3] or None)
    bad = [g.label for g in stab if equivariance_defect(ca, g) is not None]
    rep.add("symmetries commute with the boundary", not bad, bad[:3] or None)
    bad = []
    for k in range(random_elements):
        terms = int(rng.integers(1, 5))
        f = [(Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5))), stab[int(rng.integers(len(stab)))])
             for _ in range(terms)]
        h = hecke_trace(f, E, S, ca, u)
        if not h.consistent:
            bad.append({"k": k, "h0": h.trace_h0, "euler": h.euler_sum, "ambient": h.ambient_trace})
    rep.add(f"trace on H_0 equals Euler sum and ambient trace for {random_elements} elements", not bad,
            bad[:3] or None)
    return rep


def corner_fullness_report(ref: ReferenceModel) -> Report:
    delta = max(ref.sigma.maximal(), key=sorted)
    gens = [ref.model.action_matrix(g) for g in general_linear_generators(2, ref.p, ref.M)]
    return check_corner_fullness(ref.system, ref.sigma, delta, stabilizer(ref.system, ref.sigma), gens)
