"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest -v tests/test_acceptance.py``; the lines appear even when
output capture is on.
"""

import itertools
import random
import time

import pytest

from oracles import naive_types

from graphcsp.behaviors import closure, parse_behavior
from graphcsp.entailment import forbidden_shapes, instantiates
from graphcsp.generators import CORPUS_FAMILIES, corpus, random_binary_instance, random_instance, random_language
from graphcsp.graphs import OMEGA, GraphFamily, l_value
from graphcsp.instance import BUILTINS
from graphcsp.minimality import build_engine, establish_minimality, is_trivial, verify_minimality
from graphcsp.orbits import EQ, E, N, OrbitRelation, enumerate_types, type_table
from graphcsp.solver import decide_width, fixture_i1, fixture_i2, oracle, solve_search
from graphcsp.typestructure import (
    build_type_structure,
    finite_solve,
    finite_verify_minimality,
    refine_translation,
    translate_instance,
)

RANDOM = GraphFamily.random()
C2 = GraphFamily.cliques(OMEGA, 2)
CORPUS_SIZE = 1000


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


_corpora = {}
_oracle_status = {}


def main_corpus(fam, builtins_only=False):
    key = (str(fam), builtins_only)
    if key not in _corpora:
        _corpora[key] = corpus(1, fam, CORPUS_SIZE, max_vars=6, builtins_only=builtins_only)
    return _corpora[key]


def oracle_statuses(fam, builtins_only=False):
    key = (str(fam), builtins_only)
    if key not in _oracle_status:
        _oracle_status[key] = [oracle(inst).status for inst in main_corpus(fam, builtins_only)]
    return _oracle_status[key]


# -- 1 -------------------------------------------------------------------------------------

def test_c1_search_matches_oracle(report):
    start = time.perf_counter()
    bad = []
    for fam in CORPUS_FAMILIES:
        for idx, (inst, want) in enumerate(zip(main_corpus(fam), oracle_statuses(fam))):
            if solve_search(inst).status != want:
                bad.append((str(fam), idx))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 300
    report(1, ok, f"{len(bad)} disagreements over {CORPUS_SIZE} x {len(CORPUS_FAMILIES)} instances, {elapsed:.1f}s")
    assert not bad, bad[:10]
    assert elapsed < 300


# -- 2 -------------------------------------------------------------------------------------

def test_c2_width_matches_oracle(report):
    bad = []
    for fam in CORPUS_FAMILIES:
        L = l_value(fam)
        for idx, (inst, want) in enumerate(zip(main_corpus(fam, True), oracle_statuses(fam, True))):
            if decide_width(inst, 2, L).status != want:
                bad.append((str(fam), idx))
    report(2, not bad, f"{len(bad)} disagreements, builtin language, width (2, L)")
    assert not bad, bad[:10]


# -- 3 -------------------------------------------------------------------------------------

FIXTURE_FAMILIES = list(CORPUS_FAMILIES) + [GraphFamily.henson(5)]


def test_c3_fixtures_are_minimal_and_unsat(report):
    failures = []
    for fam in FIXTURE_FAMILIES:
        L = l_value(fam)
        for name, inst, k, l in (("I1", fixture_i1(fam), 1, L), ("I2", fixture_i2(fam), 2, L - 1)):
            m = establish_minimality(inst, k, l)
            if is_trivial(m) or not verify_minimality(m, k, l)[0] or oracle(inst).sat:
                failures.append(f"{name}/{fam}")
    report(3, not failures, f"I1 at (1,L), I2 at (2,L-1) over {len(FIXTURE_FAMILIES)} families; failures: {failures}")
    assert not failures


# -- 4 -------------------------------------------------------------------------------------

REFERENCE_TABLES = {
    "max:balanced": "= E N / E E E / N E N",
    "e_constant": "= E E / E E E / E E E",
    "min:n_dominated": "= N N / N E N / N N N",
}


def test_c4_binary_tables(report):
    mismatched = 0
    for spec, text in REFERENCE_TABLES.items():
        b = parse_behavior(spec)
        want = [row.split() for row in text.split(" / ")]
        for i, x in enumerate((EQ, E, N)):
            for j, y in enumerate((EQ, E, N)):
                if b(x, y).symbol != want[i][j]:
                    mismatched += 1
    report(4, mismatched == 0, f"{mismatched} of 27 cells differ")
    assert mismatched == 0


# -- 5 -------------------------------------------------------------------------------------

def test_c5_type_counts(report):
    cases = [(RANDOM, 2, 3), (RANDOM, 3, 15), (GraphFamily.henson(3), 3, 14), (C2, 3, 11)]
    got = []
    for fam, r, want in cases:
        fast = {t.labels for t in enumerate_types(fam, r).orbits}
        got.append((len(fast), len(naive_types(fam, r)), fast == naive_types(fam, r), want))
    ok = all(a == b == w and same for a, b, same, w in got)
    report(5, ok, "counts " + ", ".join(f"{a}" for a, _, _, _ in got) + " (naive enumerator agrees)")
    assert ok


# -- 6 -------------------------------------------------------------------------------------

SHAPE_BEHAVIORS = ["max:balanced", "max:e_dominated", "min:balanced", "min:n_dominated", "e_constant", "n_constant"]


def _fits(t, q):
    if t.label(0, 1) in q.s1 and t.label(2, 3) not in q.s2:
        return False
    return all(t.label(i, j) in s for (i, j), s in q.side_conditions)


def test_c6_closure_destroys_forbidden_shapes(report):
    table = type_table(RANDOM, 4)
    rng = random.Random(6)
    seeds = exceptions = cross_checked = 0
    for spec in SHAPE_BEHAVIORS:
        b = parse_behavior(spec)
        for shape in forbidden_shapes(b):
            q = shape.query
            fitting = [t for t in table if _fits(t, q)]
            for size in (1, 2, 3):
                for combo in itertools.combinations(fitting, size):
                    fw = any(t.label(0, 1) in q.s1 and t.label(2, 3) in q.s2 for t in combo)
                    bw = any(t.label(0, 1) not in q.s1 and t.label(2, 3) not in q.s2 for t in combo)
                    if not (fw and bw):
                        continue
                    seeds += 1
                    rel = OrbitRelation(4, frozenset(combo))
                    # witnesses survive in any superset, so the shape is gone
                    # exactly when some orbit of the closure stops fitting
                    broke = []
                    closure([b], rel, RANDOM, until=lambda t: (not _fits(t, q)) and not broke.append(t))
                    if not broke:
                        exceptions += 1
                    if rng.random() < 0.002:
                        cross_checked += 1
                        assert instantiates(rel, q)
                        assert not instantiates(closure([b], rel, RANDOM), q)
    report(6, exceptions == 0 and seeds > 0,
           f"{seeds} seed relations, {exceptions} exceptions ({cross_checked} re-checked in full)")
    assert seeds > 0 and exceptions == 0


# -- 7 -------------------------------------------------------------------------------------

def _ternary_corpus(seed, fam, m, size):
    language = random_language(seed, fam, 3, arity=3)
    rng = random.Random(f"c7:{seed}:{fam}:{m}")
    return [random_instance(rng, fam, language, max_vars=5, min_vars=m) for _ in range(size)]


def _correspondence(fam, m, instances):
    bad = 0
    for inst in instances:
        ts = build_type_structure({**BUILTINS, **inst.relations}, fam, m)
        if finite_solve(ts, translate_instance(inst, m, ts)).sat != oracle(inst).sat:
            bad += 1
    return bad


def test_c7_correspondence_pairs_over_random(report):
    insts = [i for i in corpus(7, RANDOM, 200, max_vars=5, builtins_only=True) if i.n >= 2]
    bad = _correspondence(RANDOM, 2, insts)
    report("7a", bad == 0, f"Random m=2: {bad} of {len(insts)} disagree")
    assert bad == 0


@pytest.mark.parametrize("fam", [RANDOM, C2], ids=str)
def test_c7_correspondence_triples(report, fam):
    insts = _ternary_corpus(7, fam, 3, 200)
    bad = _correspondence(fam, 3, insts)
    report("7b", bad == 0, f"{fam} m=3: {bad} of {len(insts)} disagree")
    assert bad == 0


def test_c7_refined_translations_are_minimal(report):
    checked = failed = 0
    for fam, m in ((RANDOM, 2), (RANDOM, 3), (C2, 3)):
        for inst in corpus(17, fam, 60, max_vars=5, builtins_only=True):
            if inst.n < m:
                continue
            src = establish_minimality(inst, 2 * m, 3 * m)
            if is_trivial(src):
                continue
            ts = build_type_structure({**BUILTINS, **inst.relations}, fam, m)
            refined = refine_translation(src, translate_instance(inst, m, ts))
            checked += 1
            if refined.is_trivial() or not finite_verify_minimality(refined, 2, 3)[0]:
                failed += 1
    report("7c", failed == 0 and checked > 0, f"{checked} refined translations, {failed} not (2,3)-minimal")
    assert checked > 0 and failed == 0


# -- 8 -------------------------------------------------------------------------------------

def _classes(t):
    """Clique index of each position, taking position 0 to be in clique 0."""
    return tuple(0 if i == 0 or t.label(0, i) in (EQ, E) else 1 for i in range(t.arity))


def test_c8_two_class_quotient_has_majority(report):
    rel = [t for t in enumerate_types(C2, 3).orbits
           if (t.label(0, 1), t.label(1, 2)) in ((E, N), (N, E))]
    quotient = set()
    for t in rel:
        c = _classes(t)
        quotient.add(c)
        quotient.add(tuple(1 - x for x in c))
    expected = {c for c in itertools.product((0, 1), repeat=3) if c[0] != c[2]}
    closed = all(
        tuple(int(a + b + c >= 2) for a, b, c in zip(x, y, z)) in quotient
        for x, y, z in itertools.product(sorted(quotient), repeat=3)
    )
    triples = len(quotient) ** 3
    ok = quotient == expected and closed and triples == 64
    report(8, ok, f"quotient {sorted(quotient)}, majority closed over {triples} triples")
    assert ok


# -- 9 -------------------------------------------------------------------------------------

def test_c9_engine_laws(report):
    failures = []
    for fam in CORPUS_FAMILIES:
        L = l_value(fam)
        for idx, (inst, want) in enumerate(zip(main_corpus(fam), oracle_statuses(fam))):
            m = establish_minimality(inst, 2, L)
            engine, _ = build_engine(inst, 2, L)
            again = establish_minimality(m.to_instance(), 2, L)
            laws = (
                establish_minimality(inst, 2, L) == m,
                all(after & ~before == 0 for before, after in zip(engine.masks, m.masks)),
                again.masks == m.masks and again.scopes == m.scopes,
                oracle(m.to_instance()).status == want,
            )
            if not all(laws):
                failures.append((str(fam), idx, laws))
    start = time.perf_counter()
    for seed in range(3):
        establish_minimality(random_binary_instance(seed, RANDOM, 60), 2, 3)
    average = (time.perf_counter() - start) / 3
    ok = not failures and average < 10
    report(9, ok, f"{len(failures)} law violations; 60-variable establishment {average:.2f}s average")
    assert not failures, failures[:5]
    assert average < 10
