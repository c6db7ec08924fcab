"""One test per acceptance criterion, each printing a single PASS or FAIL line.

All arithmetic is exact, so every comparison is an equality. Each criterion
also enforces its wall-clock budget.
"""

import time

import pytest

from btcosheaf import batteries as bt
from btcosheaf.cli import run
from btcosheaf.report import Report
from conftest import ACCEPTANCE_LINES

SEED = 0
GROUP_CASES = [(2, 0, "projective"), (2, 1, "projective"), (3, 0, "projective"), (3, 1, "projective"),
               (2, 0, "regular")]


@pytest.fixture(scope="module")
def instances():
    return bt.diagonal_battery_instances(SEED, 50)


@pytest.fixture(scope="module")
def reference_models():
    return {case: bt.reference_model(case[0], case[1], case[2]) for case in GROUP_CASES}


def _record(number, title, report, elapsed, limit):
    within = limit is None or elapsed < limit
    ok = report.passed and within
    budget = "no limit" if limit is None else f"limit {limit} s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({elapsed:.2f} s, {budget})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert report.passed, [c.to_json() for c in report.failures()]
    assert within


def test_criterion_1_counterexample_a3(tmp_path):
    start = time.perf_counter()
    rep = bt.counterexample_a3()
    elapsed = time.perf_counter() - start
    status, report = run(["counterexample-a3", "--out", str(tmp_path / "a3.json")])
    assert status == 0 and all(c["status"] == "pass" for c in report["checks"])
    assert len(rep.checks) == 8
    _record(1, "A3 counterexample and hull descriptions", rep, elapsed, 1)


def test_criterion_2_hull_oracle():
    start = time.perf_counter()
    rep = bt.hull_battery(SEED, 100, sides=(6, 4))
    _record(2, "half-space hull equals convex closure on 100 pairs", rep, time.perf_counter() - start, 60)


def test_criterion_3_geometric_lemmas():
    start = time.perf_counter()
    rep = bt.lemma_battery(SEED, 200)
    _record(3, "minimal face, maximal cone and paths on 200 instances", rep, time.perf_counter() - start, 60)


def test_criterion_4_support_projection():
    start = time.perf_counter()
    inst = bt.diagonal_battery_instances(SEED, 50)
    assert len(inst) == 50 and all(len(i.supports) >= 8 for i in inst)
    rep = bt.support_battery(inst, min_splits=20)
    _record(4, "support projection on 50 complexes with additivity on 20+ splits", rep,
            time.perf_counter() - start, 120)


def test_criterion_5_exactness(instances):
    start = time.perf_counter()
    rep = bt.exactness_battery(instances)
    _record(5, "resolution exact outside degree zero on 50 complexes", rep, time.perf_counter() - start, 300)


def test_criterion_6_group_model():
    rep = Report()
    slowest = 0.0
    for p, r, space in GROUP_CASES:
        start = time.perf_counter()
        ref = bt.reference_model(p, r, space)
        assert ref.M == r + 2 and len(ref.sigma.vertices()) == r + 2
        rep.extend(bt.group_model_report(ref), prefix=f"p={p} r={r} {space}: ")
        slowest = max(slowest, time.perf_counter() - start)
    names = [c.name for c in rep.checks]
    assert any("(d)" in n for n in names) and any("(e)" in n for n in names)
    _record(6, "group model end to end for p in {2,3}, r in {0,1}", rep, slowest, 300)


def test_criterion_7_lefschetz(reference_models):
    start = time.perf_counter()
    rep = Report()
    for (p, r, space), ref in reference_models.items():
        rep.extend(bt.character_report(ref, SEED, 20), prefix=f"p={p} r={r} {space}: ")
    _record(7, "Lefschetz sums and Euler cross-check in every group model", rep,
            time.perf_counter() - start, 120)


def test_criterion_8_serre(instances):
    start = time.perf_counter()
    rep = bt.serre_battery(instances, SEED, 20)
    _record(8, "hereditary implications on 20 short exact sequences", rep, time.perf_counter() - start, 60)


def test_criterion_9_stabilization():
    start = time.perf_counter()
    rep = bt.stabilization_battery(SEED)
    _record(9, "H_0 maps injective along nested complexes", rep, time.perf_counter() - start, 60)


def test_criterion_10_mayer_vietoris(instances):
    start = time.perf_counter()
    rep = bt.mayer_vietoris_battery(instances, min_splits=20)
    _record(10, "Mayer-Vietoris rank identities on 20+ splits", rep, time.perf_counter() - start, None)
