import itertools
import random

import pytest

from graphcsp.errors import NotMinimal, NotRealizable, TooManyVariables
from graphcsp.generators import BUILTIN_NAMES, CORPUS_FAMILIES, corpus
from graphcsp.graphs import OMEGA, GraphFamily, l_value
from graphcsp.instance import make_instance
from graphcsp.minimality import establish_minimality, is_simple, is_trivial, quotient_and_check, verify_minimality
from graphcsp.orbits import EQ, E, N, OrbitRelation, parse_orbit
from graphcsp.solver import (
    Stuck,
    decide_width,
    fixture_i1,
    fixture_i2,
    fixtures,
    oracle,
    oracle_naive,
    realize_certificate,
    shrink_to_simple,
    solve,
    solve_search,
    verify_certificate,
)

RANDOM = GraphFamily.random()
H3 = GraphFamily.henson(3)
C2 = GraphFamily.cliques(OMEGA, 2)


def path(family):
    return make_instance(family, ["v1", "v2", "v3"],
                         [(("v1", "v2"), "E"), (("v2", "v3"), "E"), (("v1", "v3"), "N")])


# -- oracle ------------------------------------------------------------------------------

def test_oracle_examples():
    v = oracle(path(RANDOM))
    assert v.sat and v.mode == "oracle"
    assert verify_certificate(path(RANDOM), v.certificate)[0]
    assert not oracle(path(C2)).sat
    assert oracle(path(H3)).sat


def test_oracle_cap():
    big = make_instance(RANDOM, [f"v{i}" for i in range(9)], [])
    with pytest.raises(TooManyVariables):
        oracle(big)
    with pytest.raises(TooManyVariables):
        oracle_naive(big)
    assert oracle(make_instance(RANDOM, [], [])).sat


@pytest.mark.parametrize("fam", CORPUS_FAMILIES, ids=str)
def test_oracle_matches_naive_scan(fam):
    for inst in corpus(2, fam, 120, max_vars=5):
        a, b = oracle(inst), oracle_naive(inst)
        assert a.status == b.status
        assert a.certificate == b.certificate


# -- width mode ------------------------------------------------------------------------

def test_decide_width_examples():
    tri = make_instance(C2, ["v1", "v2", "v3"],
                        [(("v1", "v2"), "E"), (("v1", "v3"), "E"), (("v2", "v3"), "N")])
    assert not decide_width(tri).sat
    assert not decide_width(fixture_i2(RANDOM), 2, 3).sat
    assert not decide_width(fixture_i1(RANDOM)).sat
    v = decide_width(path(RANDOM))
    assert v.sat and v.certificate is None and v.note == "assumed width (2,3)"


@pytest.mark.parametrize("fam", CORPUS_FAMILIES, ids=str)
def test_width_unsat_is_sound(fam):
    for inst in corpus(5, fam, 150):
        if not decide_width(inst).sat:
            assert not oracle(inst).sat


# -- shrinking ------------------------------------------------------------------------

def test_shrink_examples():
    inst = make_instance(RANDOM, ["v1", "v2"], [(("v1", "v2"), "NEQ")])
    m = establish_minimality(inst, 2, 3)
    s = shrink_to_simple(m, [E, N, EQ])
    assert is_simple(s)
    assert s.pair(0, 1) == frozenset({E})
    v = quotient_and_check(s)
    assert v.sat and oracle(inst).sat
    s2 = shrink_to_simple(m, [N, E, EQ])
    assert s2.pair(0, 1) == frozenset({N})


def test_shrink_simple_input_unchanged():
    m = establish_minimality(path(RANDOM), 2, 3)
    assert is_simple(m)
    s = shrink_to_simple(m)
    assert s.masks == m.masks and s.scopes == m.scopes


def test_shrink_rejects_trivial_input():
    with pytest.raises(NotMinimal):
        shrink_to_simple(establish_minimality(fixture_i1(RANDOM), 2, 3))


def test_shrink_can_get_stuck_on_arbitrary_relations():
    # greedy pinning has no guarantee for arbitrary quaternary relations;
    # search still decides these instances correctly
    stuck = []
    for inst in corpus(0, H3, 200, max_vars=5):
        m = establish_minimality(inst, 2, 3)
        if not is_trivial(m):
            s = shrink_to_simple(m)
            if isinstance(s, Stuck):
                stuck.append((inst, s))
    assert stuck
    for inst, s in stuck:
        assert s.attempted and s.pair[0] in inst.variables
        assert "trivializes" in str(s)
        assert solve_search(inst).status == oracle(inst).status


def random_ene_instance(rng, n):
    names = [f"v{i + 1}" for i in range(n)]
    cons = []
    for _ in range(rng.randint(1, n + 2)):
        a, b = rng.sample(names, 2)
        cons.append(((a, b), rng.choice(["E", "N", "="])))
    return make_instance(RANDOM, names, cons)


def test_shrink_never_stuck_on_orbital_language():
    rng = random.Random(1000)
    seen = 0
    while seen < 1000:
        inst = random_ene_instance(rng, rng.randint(2, 6))
        m = establish_minimality(inst, 2, 3)
        if is_trivial(m):
            continue
        seen += 1
        s = shrink_to_simple(m)
        assert not isinstance(s, Stuck), str(s)
        assert is_simple(s)
        v = quotient_and_check(s)
        assert v.sat and oracle(inst).sat
        assert verify_certificate(inst, v.certificate)[0]


# -- search ---------------------------------------------------------------------------

def test_solve_search_examples():
    v = solve_search(fixture_i1(RANDOM))
    assert not v.sat and v.note == "trivial after establishment"
    m = establish_minimality(path(RANDOM), 2, 3)
    assert solve_search(path(RANDOM)).certificate == quotient_and_check(m).certificate
    assert solve(path(RANDOM), "oracle").sat
    with pytest.raises(ValueError):
        solve(path(RANDOM), "guess")


@pytest.mark.parametrize("fam", CORPUS_FAMILIES, ids=str)
def test_search_matches_oracle_exhaustive_three_variables(fam):
    # every instance with one builtin (or nothing) on each pair of three variables
    names = ["v1", "v2", "v3"]
    pairs = list(itertools.combinations(names, 2))
    for choice in itertools.product((None,) + BUILTIN_NAMES, repeat=3):
        cons = [(p, c) for p, c in zip(pairs, choice) if c is not None]
        inst = make_instance(fam, names, cons)
        a, b = solve_search(inst), oracle(inst)
        assert a.status == b.status
        if a.sat:
            assert verify_certificate(inst, a.certificate)[0]


def test_search_priority_changes_certificate_not_verdict():
    inst = make_instance(RANDOM, ["v1", "v2"], [(("v1", "v2"), "ALLOW")],
                         {"ALLOW": OrbitRelation.from_strings(2, ["E", "N", "="])})
    assert solve_search(inst, [E, N, EQ]).certificate == parse_orbit("E")
    assert solve_search(inst, [N, E, EQ]).certificate == parse_orbit("N")
    assert solve_search(inst, [EQ, E, N]).certificate == parse_orbit("=")


# -- certificates ------------------------------------------------------------------------

def test_verify_certificate_rejects_bad_certificates():
    inst = path(RANDOM)
    assert not verify_certificate(inst, parse_orbit("E,E,E"))[0]
    assert not verify_certificate(inst, parse_orbit("E"))[0]
    ok, msg = verify_certificate(path(C2), parse_orbit("E,N,E"))
    assert not ok and "bound" in msg


def test_realize_certificate_examples():
    r = realize_certificate(parse_orbit("E,N,E"), ["a", "b", "c"])
    assert r.graph.order == 3 and len(r.graph.edges) == 2
    r = realize_certificate(parse_orbit("=,=,="), ["a", "b", "c"])
    assert r.graph.order == 1 and set(r.mapping.values()) == {0}
    r = realize_certificate(parse_orbit("E,N,N,N,N,="), ["a", "b", "c", "d"])
    assert r.graph.order == 3 and r.mapping["c"] == r.mapping["d"]
    with pytest.raises(NotRealizable):
        realize_certificate(parse_orbit("E,E,E"), ["a", "b", "c"], H3)
    with pytest.raises(ValueError):
        realize_certificate(parse_orbit("E"), ["a", "b", "c"])


# -- fixtures ----------------------------------------------------------------------------

@pytest.mark.parametrize("fam", list(CORPUS_FAMILIES) + [GraphFamily.henson(5)], ids=str)
def test_fixtures(fam):
    fx = fixtures(fam)
    L = l_value(fam)
    assert set(fx) == {"I1", "I2" if L == 3 else "I2_bound"}
    for inst in fx.values():
        assert not oracle(inst).sat
    m1 = establish_minimality(fixture_i1(fam), 1, L)
    assert not is_trivial(m1) and verify_minimality(m1, 1, L)[0]
    m2 = establish_minimality(fixture_i2(fam), 2, L - 1)
    assert not is_trivial(m2) and verify_minimality(m2, 2, L - 1)[0]
    assert is_trivial(establish_minimality(fixture_i2(fam), 2, L))
