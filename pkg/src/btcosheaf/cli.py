"""Command-line front end: every harness as a subcommand with a JSON report.

Exit status is 0 when every check passed, 1 when some check failed, 2 for
configuration errors and 3 when a budget was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import batteries as bt
from .apartment import Apartment, ApartmentError, BudgetExceeded, SubComplex
from .building import PAdicScalar, ball, canonical_vertex, standard_vertex
from .characters import lefschetz_sum
from .complexes import assemble_chain, mayer_vietoris, orient, verify_resolution
from .idempotents import (IdempotentError, SubgroupBudgetExceeded, check_group_consistency,
                          check_idempotent_consistency, diagonal_model, stabilizer, support_projection,
                          support_projection_report)
from .report import Report, jsonable

COMMANDS = ["hull", "convex-check", "admissible-check", "minimal-face", "paths", "counterexample-a3",
            "ball", "group-consistency", "idempotent-consistency", "support-projection", "resolve",
            "mayer-vietoris", "serre", "corner-fullness", "character", "battery"]

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="btcosheaf", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--p", type=int, default=2, help="residue characteristic")
    ap.add_argument("--d", type=int, default=2, help="rank of GL_d (building commands)")
    ap.add_argument("--r", type=int, default=0, help="congruence depth r of U^(r)")
    ap.add_argument("--precision", dest="M", type=int, default=None, help="work modulo p^M (default r+2)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget-simplices", type=int, default=200_000)
    ap.add_argument("--budget-subgroup", type=int, default=1_000_000)
    ap.add_argument("--in", dest="input", default=None, help="JSON input file ('-' for stdin)")
    ap.add_argument("--out", default=None, help="write the report here instead of stdout")
    ap.add_argument("--space", choices=["projective", "regular"], default="projective",
                    help="finite G-set for the group model")
    ap.add_argument("--timing", action="store_true",
                    help="record wall-clock timing_ms (otherwise null so reports are byte-identical)")
    return ap


# ---------------------------------------------------------------------------
# input parsing


def _load_input(path: str | None) -> dict | None:
    if path is None:
        return None
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read input: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("input must be a JSON object")
    return data


def _require(data: dict | None, *keys: str) -> dict:
    if data is None:
        raise ConfigError("this command needs --in with a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise ConfigError(f"input is missing keys: {missing}")
    return data


def _apartment(data: dict) -> Apartment:
    factors = data.get("apartment", data.get("factors", 3))
    try:
        return Apartment(tuple(factors) if isinstance(factors, list) else int(factors))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad apartment {factors!r}") from exc


def _vertex(A: Apartment, v) -> tuple:
    if not isinstance(v, list) or len(v) != A.d or not all(isinstance(c, int) for c in v):
        raise ConfigError(f"bad vertex {v!r} (need {A.d} integers)")
    return A.vertex(v)


def _simplex(A: Apartment, s) -> frozenset:
    if not isinstance(s, list) or not s:
        raise ConfigError(f"bad polysimplex {s!r}")
    verts = [_vertex(A, v) for v in s]
    try:
        sp = A.span(verts)
    except ApartmentError as exc:
        raise ConfigError(str(exc)) from exc
    if sp != frozenset(verts) and not A.is_polysimplex(verts):
        raise ConfigError(f"{s!r} is not a polysimplex")
    return sp


def _complex(A: Apartment, data: dict, budget: int) -> SubComplex:
    if "simplices" in data:
        return A.complex(_simplex(A, s) for s in data["simplices"])
    if "vertices" in data:
        return A.induced([_vertex(A, v) for v in data["vertices"]], budget)
    if "box" in data:
        lo, hi = data["box"]
        return A.enumerate_box(lo, hi, budget)
    raise ConfigError("complex needs 'simplices', 'vertices' or 'box'")


def _diagonal_system(A: Apartment, data: dict, sigma: SubComplex, budget: int):
    supports = []
    for item in data["supports"]:
        if isinstance(item, dict):
            supports.append(_complex(A, item, budget))
        else:
            supports.append(A.hull(*[[_vertex(A, v)] for v in item]))
    return diagonal_model(sigma, supports)


def _matrix_entries(data):
    return [[PAdicScalar.parse(x) if isinstance(x, str) else Fraction(x) for x in row] for row in data]


# ---------------------------------------------------------------------------
# commands


def cmd_hull(args, data) -> tuple[Report, dict]:
    data = _require(data, "sigma", "tau")
    A = _apartment(data)
    s, t = _simplex(A, data["sigma"]), _simplex(A, data["tau"])
    h = A.hull(s, t)
    rep = Report()
    rep.add("hull agrees with convex closure", h == A.convex_closure(A.complex([s, t]), args.budget_simplices))
    return rep, {"hull": h.to_json()}


def cmd_convex(args, data):
    A = _apartment(_require(data))
    S = _complex(A, data, args.budget_simplices)
    w = A.convex_witness(S)
    rep = Report()
    rep.add("convex", w is None, None if w is None else {"sigma": w[0], "tau": w[1], "omega": w[2]})
    return rep, {}


def cmd_admissible(args, data):
    A = _apartment(_require(data))
    S = _complex(A, data, args.budget_simplices)
    w = A.admissibility_witness(S)
    rep = Report()
    rep.add("admissible", w is None, None if w is None else list(w))
    return rep, {}


def cmd_minimal_face(args, data):
    data = _require(data, "x", "sigma")
    A = _apartment(data)
    x, s = _vertex(A, data["x"]), _simplex(A, data["sigma"])
    tau = A.minimal_face(x, s)
    cone, omega = A.maximal_cone(x, s)
    rep = Report()
    rep.add("minimal face matches brute force", tau == bt.brute_minimal_face(A, x, s))
    rep.add("maximal cone matches brute force", cone == bt.brute_maximal_cone(A, x, s))
    return rep, {"minimal_face": jsonable(tau), "maximal_cone": jsonable(cone),
                 "omega": None if omega is None else jsonable(omega)}


def cmd_paths(args, data):
    data = _require(data, "sigma", "tau")
    A = _apartment(data)
    s, t = _simplex(A, data["sigma"]), _simplex(A, data["tau"])
    rep = Report()
    extra = {}
    if "y" in data:
        y = _vertex(A, data["y"])
        try:
            path = A.vertex_path(s, t, y)
            rep.add("vertex path verifies", True)
            extra["vertex_path"] = jsonable(path)
        except ApartmentError as exc:
            rep.add("vertex path verifies", False, str(exc))
    if "omega" in data:
        om = _simplex(A, data["omega"])
        try:
            path = A.simplex_path(s, t, om)
            rep.add("simplex path verifies", True)
            extra["simplex_path"] = jsonable(path)
        except ApartmentError as exc:
            rep.add("simplex path verifies", False, str(exc))
    if not rep.checks:
        raise ConfigError("paths needs 'y' and/or 'omega'")
    return rep, extra


def cmd_counterexample(args, data):
    return bt.counterexample_a3(), {}


def cmd_ball(args, data):
    data = data or {}
    radius = int(data.get("radius", 1))
    if "center" in data:
        center = canonical_vertex(_matrix_entries(data["center"]), args.p)
    else:
        center = standard_vertex(args.d, args.p)
    B = ball(center, radius, args.budget_simplices)
    rep = Report()
    rep.add("ball is a flag complex containing the center", center in B.vertices())
    return rep, {"vertices": len(B.vertices()), "simplices": len(B.simplices),
                 "center": center.to_json()}


def _group_setup(args):
    if args.d != 2:
        raise ConfigError("the group model is the d = 2 tree segment")
    try:
        return bt.reference_model(args.p, args.r, args.space, args.M, args.budget_subgroup)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _system_and_complex(args, data):
    """Diagonal model when the input lists supports, otherwise the reference group model."""
    if data is not None and "supports" in data:
        A = _apartment(data)
        S = _complex(A, data, args.budget_simplices)
        return _diagonal_system(A, data, S, args.budget_simplices), S, None
    ref = _group_setup(args)
    return ref.system, ref.sigma, ref


def cmd_group_consistency(args, data):
    ref = _group_setup(args)
    syms = [(g.element, g.vertex_map) for g in ref.system.symmetries]
    return check_group_consistency(ref.K, ref.sigma, ref.model.q, syms), {"model": ref.model.to_json()}


def cmd_idempotent_consistency(args, data):
    E, S, _ = _system_and_complex(args, data)
    return check_idempotent_consistency(E, S), {}


def cmd_support_projection(args, data):
    E, S, _ = _system_and_complex(args, data)
    u = support_projection(E, S, verify=False)
    return support_projection_report(E, S, u), {"triples": [[i, j, str(x)] for i, j, x in u.triples()]}


def cmd_resolve(args, data):
    E, S, _ = _system_and_complex(args, data)
    return verify_resolution(E, S), {}


def cmd_mayer_vietoris(args, data):
    if data is not None and "supports" in data:
        E, S, _ = _system_and_complex(args, data)
        rep = Report()
        for root in bt.separating_roots(S):
            rep.extend(mayer_vietoris(E, S, root), prefix=f"{tuple(root)}: ")
        return rep, {}
    inst = bt.diagonal_battery_instances(args.seed, 10)
    return bt.mayer_vietoris_battery(inst, min_splits=1), {"rng": bt.rng_header(args.seed)}


def cmd_serre(args, data):
    inst = bt.diagonal_battery_instances(args.seed, 10)
    return bt.serre_battery(inst, args.seed, 20), {"rng": bt.rng_header(args.seed)}


def cmd_corner(args, data):
    return bt.corner_fullness_report(_group_setup(args)), {}


def cmd_character(args, data):
    ref = _group_setup(args)
    rep = bt.character_report(ref, args.seed)
    oc = orient(ref.sigma)
    ca = assemble_chain(ref.system, oc)
    elements = [lefschetz_sum(ref.system, oc, ref.sigma, g, ca).to_json()
                for g in stabilizer(ref.system, ref.sigma)[:8]]
    return rep, {"rng": bt.rng_header(args.seed), "sample": elements}


def cmd_battery(args, data):
    """A reduced randomized suite covering every harness."""
    rep = Report()
    rep.extend(bt.counterexample_a3(), "a3: ")
    rep.extend(bt.hull_battery(args.seed, 20, sides=(4, 3)), "hull: ")
    rep.extend(bt.lemma_battery(args.seed, 40), "lemmas: ")
    inst = bt.diagonal_battery_instances(args.seed, 10)
    rep.extend(bt.support_battery(inst, min_splits=1), "support: ")
    rep.extend(bt.exactness_battery(inst), "exactness: ")
    rep.extend(bt.mayer_vietoris_battery(inst, min_splits=1), "mayer-vietoris: ")
    rep.extend(bt.serre_battery(inst, args.seed, 10), "serre: ")
    ref = _group_setup(args)
    rep.extend(bt.group_model_report(ref), "group: ")
    rep.extend(bt.character_report(ref, args.seed, 5), "character: ")
    return rep, {"rng": bt.rng_header(args.seed)}


HANDLERS = {
    "hull": cmd_hull, "convex-check": cmd_convex, "admissible-check": cmd_admissible,
    "minimal-face": cmd_minimal_face, "paths": cmd_paths, "counterexample-a3": cmd_counterexample,
    "ball": cmd_ball, "group-consistency": cmd_group_consistency,
    "idempotent-consistency": cmd_idempotent_consistency, "support-projection": cmd_support_projection,
    "resolve": cmd_resolve, "mayer-vietoris": cmd_mayer_vietoris, "serre": cmd_serre,
    "corner-fullness": cmd_corner, "character": cmd_character, "battery": cmd_battery,
}


def _config(args) -> dict:
    return {"p": args.p, "d": args.d, "r": args.r, "M": args.M if args.M is not None else args.r + 2,
            "seed": args.seed, "budget_simplices": args.budget_simplices,
            "budget_subgroup": args.budget_subgroup, "space": args.space, "input": args.input}


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    """Parse arguments, run one command, and return (exit status, report)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS, {"error": "argument parsing failed"}
    report = {"command": args.command, "config": _config(args)}
    start = time.perf_counter()
    try:
        if args.budget_simplices <= 0 or args.budget_subgroup <= 0:
            raise ConfigError("budgets must be positive")
        if args.p < 2 or any(args.p % f == 0 for f in range(2, int(args.p ** 0.5) + 1)):
            raise ConfigError("--p must be a prime")
        data = _load_input(args.input)
        rep, extra = HANDLERS[args.command](args, data)
        status = EXIT_PASS if rep.passed else EXIT_FAIL
        report["checks"] = rep.to_json()
        report.update(jsonable(extra))
    except ConfigError as exc:
        status = EXIT_CONFIG
        report["checks"] = []
        report["error"] = str(exc)
    except (BudgetExceeded, SubgroupBudgetExceeded) as exc:
        status = EXIT_BUDGET
        report["checks"] = []
        report["error"] = str(exc)
    except (ApartmentError, IdempotentError) as exc:
        status = EXIT_FAIL
        report["checks"] = [{"name": "precondition", "status": "fail", "witness": str(exc)}]
    elapsed = (time.perf_counter() - start) * 1000
    report["timing_ms"] = round(elapsed, 3) if args.timing else None
    text = json.dumps(report, indent=2, sort_keys=False, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status, report


def main(argv: list[str] | None = None) -> int:
    status, _ = run(argv)
    return status


if __name__ == "__main__":
    sys.exit(main())
