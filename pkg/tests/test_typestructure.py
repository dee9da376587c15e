import itertools

import pytest

from graphcsp.errors import ArityTooLarge, MinimalityMismatch, MTooSmall, TooFewVariables
from graphcsp.generators import corpus
from graphcsp.graphs import OMEGA, GraphFamily
from graphcsp.instance import BUILTINS, make_instance
from graphcsp.minimality import establish_minimality, is_trivial
from graphcsp.orbits import EQ, OrbitRelation, enumerate_types, parse_orbit
from graphcsp.solver import oracle
from graphcsp.typestructure import (
    build_type_structure,
    check_finite_assignment,
    default_m,
    finite_solve,
    finite_verify_minimality,
    refine_translation,
    translate_instance,
)

RANDOM = GraphFamily.random()
C2 = GraphFamily.cliques(OMEGA, 2)
ENQ = {name: BUILTINS[name] for name in ("E", "N", "=")}


def inst3(family, cons):
    return make_instance(family, ["v1", "v2", "v3"], cons)


# -- structure ---------------------------------------------------------------------------

def test_build_examples():
    ts = build_type_structure(ENQ, RANDOM, 2)
    assert len(ts.elements) == 3
    e_index = ts.elements.index(parse_orbit("E"))
    assert ts.unary("E", (0, 1)) == frozenset({e_index})
    assert ts.comp((0, 1), (0, 1)) == frozenset((p, p) for p in range(3))
    assert len(build_type_structure(ENQ, RANDOM, 3).elements) == 15


@pytest.mark.parametrize("fam,m", [(RANDOM, 2), (RANDOM, 3), (C2, 3), (GraphFamily.henson(3), 3)], ids=str)
def test_elements_are_all_types(fam, m):
    ts = build_type_structure(ENQ, fam, m)
    assert set(ts.elements) == set(enumerate_types(fam, m))


def test_unary_reads_relation_along_index_map():
    ts = build_type_structure(ENQ, RANDOM, 3)
    for p, t in enumerate(ts.elements):
        assert (p in ts.unary("E", (0, 2))) == (t.label(0, 2).symbol == "E")
        # a repeated index always gives '='
        assert p in ts.unary("=", (1, 1))


def comp_oracle(ts, i, j):
    out = set()
    for p, tp in enumerate(ts.elements):
        for q, tq in enumerate(ts.elements):
            if all(tp.label(i[a], i[b]) == tq.label(j[a], j[b]) for a, b in itertools.product(range(len(i)), repeat=2)):
                out.add((p, q))
    return frozenset(out)


def test_comp_matches_definition_and_is_symmetric():
    ts = build_type_structure(ENQ, RANDOM, 3)
    for r in (1, 2):
        for i in itertools.product(range(3), repeat=r):
            for j in itertools.product(range(3), repeat=r):
                c = ts.comp(i, j)
                assert c == comp_oracle(ts, i, j)
                assert ts.comp(j, i) == frozenset((q, p) for p, q in c)


def test_comp_relations_listing():
    ts = build_type_structure(ENQ, RANDOM, 2)
    keys = [key for key, _ in ts.comp_relations()]
    assert len(keys) == 2 * 2 + 4 * 4


def test_build_errors():
    quaternary = {"R": enumerate_types(RANDOM, 4)}
    with pytest.raises(MTooSmall):
        build_type_structure(quaternary, RANDOM, 3)
    with pytest.raises(ArityTooLarge):
        build_type_structure(ENQ, RANDOM, 7)
    assert default_m(ENQ, RANDOM) == 3
    assert default_m(quaternary, RANDOM) == 5
    assert default_m(ENQ, GraphFamily.henson(4)) == 4


# -- translation -------------------------------------------------------------------------

def test_translate_examples():
    inst = inst3(RANDOM, [(("v1", "v2"), "E")])
    ts = build_type_structure(ENQ, RANDOM, 2)
    ti = translate_instance(inst, 2, ts)
    assert ti.variables == ["v1.v2", "v1.v3", "v2.v3"]
    unary = [c for c in ti.constraints if len(c.scope) == 1]
    assert len(unary) == 1 and unary[0].scope == (0,)
    assert unary[0].tuples == frozenset((p,) for p in ts.unary("E", (0, 1)))
    comps = [c for c in ti.constraints if len(c.scope) == 2]
    # each pair of 2-sets shares exactly one variable, so one bijection each
    assert len(comps) == 3
    assert {c.scope for c in comps} == {(0, 1), (0, 2), (1, 2)}


def test_translate_two_shared_variables():
    inst = make_instance(RANDOM, ["a", "b", "c", "d"], [])
    ti = translate_instance(inst, 3, build_type_structure(ENQ, RANDOM, 3))
    assert len(ti.images) == 4
    # any two 3-subsets of 4 share two variables: two bijections per pair
    assert len(ti.constraints) == 6 * 2


def test_translate_errors():
    inst = make_instance(RANDOM, ["a", "b"], [])
    with pytest.raises(TooFewVariables):
        translate_instance(inst, 3)
    rel = {"R": OrbitRelation(3, frozenset({parse_orbit("E,E,N")}))}
    inst = make_instance(RANDOM, ["a", "b", "c"], [(("a", "b", "c"), "R")], rel)
    with pytest.raises(MTooSmall):
        translate_instance(inst, 2)


def test_to_json_shape():
    inst = inst3(RANDOM, [(("v1", "v2"), "E")])
    ts = build_type_structure(ENQ, RANDOM, 2)
    doc = translate_instance(inst, 2, ts).to_json(ts)
    assert doc["domain"] == {"family": "finite-types", "m": 2}
    assert doc["elements"] == ["=", "E", "N"]
    assert doc["variables"] == ["v1.v2", "v1.v3", "v2.v3"]


# -- finite solving ---------------------------------------------------------------------

def test_finite_solve_examples():
    ts = build_type_structure(ENQ, RANDOM, 2)
    sat = inst3(RANDOM, [(("v1", "v2"), "E"), (("v2", "v3"), "E"), (("v1", "v3"), "N")])
    v = finite_solve(ts, translate_instance(sat, 2, ts))
    assert v.sat and v.mode == "finite"
    assert check_finite_assignment(translate_instance(sat, 2, ts), v.assignment)
    unsat = inst3(RANDOM, [(("v1", "v2"), "E"), (("v1", "v2"), "N")])
    assert not finite_solve(ts, translate_instance(unsat, 2, ts)).sat
    one = make_instance(RANDOM, ["a", "b"], [])
    ti = translate_instance(one, 2, ts)
    assert len(ti.images) == 1 and finite_solve(ts, ti).sat


@pytest.mark.parametrize("fam,m", [(RANDOM, 3), (C2, 3)], ids=str)
def test_correspondence_small(fam, m):
    for inst in corpus(21, fam, 60, max_vars=5, n_relations=2):
        if inst.n < m:
            continue
        rels = {**ENQ, **inst.relations}
        rels = {k: v for k, v in rels.items() if v.arity <= m}
        if any(inst.relation(c.relation).arity > m for c in inst.constraints):
            continue
        ts = build_type_structure(rels, fam, m)
        assert finite_solve(ts, translate_instance(inst, m, ts)).sat == oracle(inst).sat


# -- refinement --------------------------------------------------------------------------

def test_refine_examples():
    ts = build_type_structure(ENQ, RANDOM, 2)
    sat = inst3(RANDOM, [(("v1", "v2"), "uuE"), (("v2", "v3"), "NEQ")])
    src = establish_minimality(sat, 4, 6)
    refined = refine_translation(src, translate_instance(sat, 2, ts))
    assert not refined.is_trivial()
    assert finite_verify_minimality(refined, 2, 3) == (True, None)
    unsat = inst3(RANDOM, [(("v1", "v2"), "E"), (("v1", "v2"), "N")])
    src = establish_minimality(unsat, 4, 6)
    assert is_trivial(src)
    assert refine_translation(src, translate_instance(unsat, 2, ts)).is_trivial()


def test_refine_requires_minimal_source():
    inst = inst3(RANDOM, [(("v1", "v2"), "E")])
    ts = build_type_structure(ENQ, RANDOM, 2)
    ti = translate_instance(inst, 2, ts)
    with pytest.raises(MinimalityMismatch):
        refine_translation(establish_minimality(inst, 2, 3), ti)


def test_unrefined_translation_can_fail_minimality():
    inst = inst3(RANDOM, [(("v1", "v2"), "E")])
    ts = build_type_structure(ENQ, RANDOM, 2)
    ok, _ = finite_verify_minimality(translate_instance(inst, 2, ts), 2, 3)
    assert not ok


@pytest.mark.parametrize("fam,m", [(RANDOM, 3), (C2, 3)], ids=str)
def test_refinement_preserves_verdicts(fam, m):
    for inst in corpus(31, fam, 40, max_vars=5, builtins_only=True):
        if inst.n < m:
            continue
        ts = build_type_structure(dict(BUILTINS), fam, m)
        ti = translate_instance(inst, m, ts)
        src = establish_minimality(inst, 2 * m, 3 * m)
        refined = refine_translation(src, ti)
        assert finite_solve(ts, refined).sat == finite_solve(ts, ti).sat
        if not is_trivial(src):
            assert not refined.is_trivial()
            assert finite_verify_minimality(refined, 2, 3)[0]
        else:
            assert refined.is_trivial()


def test_pair_types_miss_equality_chains():
    # with m = 2 the translated variables only see pairs, so v1 = v2 = v3
    # together with N(v1, v3) looks consistent; the refined instance does not
    inst = inst3(RANDOM, [(("v1", "v2"), "="), (("v2", "v3"), "="), (("v1", "v3"), "N")])
    ts = build_type_structure(dict(BUILTINS), RANDOM, 2)
    ti = translate_instance(inst, 2, ts)
    assert finite_solve(ts, ti).sat and not oracle(inst).sat
    refined = refine_translation(establish_minimality(inst, 4, 6), ti)
    assert not finite_solve(ts, refined).sat


def test_refined_pair_translation_matches_oracle():
    for inst in corpus(31, RANDOM, 60, max_vars=5, builtins_only=True):
        ts = build_type_structure(dict(BUILTINS), RANDOM, 2)
        src = establish_minimality(inst, 4, 6)
        refined = refine_translation(src, translate_instance(inst, 2, ts))
        assert finite_solve(ts, refined).sat == oracle(inst).sat
        if not is_trivial(src):
            assert finite_verify_minimality(refined, 2, 3)[0]


def test_equality_is_an_element():
    ts = build_type_structure(ENQ, RANDOM, 2)
    assert ts.elements[0].labels == (EQ,)
