"""Decision procedures: exact oracle, width verdicts, shrinking and search.

A satisfiable instance always has a solution described by one global type
over all variables (its orbit): the type's quotient graph embeds into the
homogeneous graph and every constraint scope projects into its relation.
The oracle searches for such a type directly; the other procedures work on
the (k,l)-minimal form of the instance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import NotMinimal, NotRealizable, TooManyVariables
from .graphs import FiniteGraph, GraphFamily, creates_bound, l_value, realizable, sorted_bounds
from .instance import Instance, make_instance
from .minimality import (
    Engine,
    MinimalInstance,
    build_engine,
    establish_minimality,
    global_type_from_pairs,
    is_trivial,
    iter_bits,
)
from .orbits import EQ, E, N, Label, QfType, _pairs, project, quotient_graph, type_table
from .verdict import SAT, UNSAT, Verdict

DEFAULT_ORACLE_CAP = 8
DEFAULT_PRIORITY = (E, N, EQ)


# -- oracle ----------------------------------------------------------------------

def oracle(inst: Instance, cap: int = DEFAULT_ORACLE_CAP) -> Verdict:
    """Exact decision by search over global types.

    Variables are placed left to right, each either joining an existing
    class or opening a new class with E/N labels towards the earlier
    classes.  Bounds are checked whenever a class is opened and each
    constraint as soon as its last variable is placed.  This visits types in
    ``QfType.sort_key`` order, so the certificate is the least one.
    """
    n = inst.n
    if n > cap:
        raise TooManyVariables(f"{n} variables exceed the oracle cap {cap}")
    if n == 0:
        return Verdict(SAT, "oracle", None, "empty instance")
    family = inst.family
    checks: List[List[Tuple[Tuple[int, ...], frozenset]]] = [[] for _ in range(n)]
    for scope, rel in inst.constraint_relations():
        checks[max(scope)].append((scope, rel.orbits))

    rgs: List[int] = []
    adjacency: List[List[bool]] = []
    n_classes = 0

    def label(a: int, b: int) -> Label:
        ca, cb = rgs[a], rgs[b]
        if ca == cb:
            return EQ
        return E if adjacency[ca][cb] else N

    def satisfied(p: int) -> bool:
        for scope, orbits in checks[p]:
            labels = tuple(label(scope[a], scope[b]) for a, b in _pairs(len(scope)))
            if QfType._trusted(len(scope), labels) not in orbits:
                return False
        return True

    def rec(p: int) -> bool:
        nonlocal n_classes
        if p == n:
            return True
        for c in range(n_classes):
            rgs.append(c)
            if satisfied(p) and rec(p + 1):
                return True
            rgs.pop()
        c = n_classes
        for choice in itertools.product((True, False), repeat=c):
            for row, bit in zip(adjacency, choice):
                row.append(bit)
            adjacency.append(list(choice) + [False])
            if not creates_bound(family, adjacency, c):
                rgs.append(c)
                n_classes += 1
                if satisfied(p) and rec(p + 1):
                    return True
                n_classes -= 1
                rgs.pop()
            adjacency.pop()
            for row in adjacency:
                row.pop()
        return False

    if rec(0):
        labels = tuple(label(a, b) for a, b in _pairs(n))
        return Verdict(SAT, "oracle", QfType._trusted(n, labels))
    return Verdict(UNSAT, "oracle")


def oracle_naive(inst: Instance, cap: int = DEFAULT_ORACLE_CAP) -> Verdict:
    """Reference oracle: scan the full type table of arity |V| in order."""
    n = inst.n
    if n > cap:
        raise TooManyVariables(f"{n} variables exceed the oracle cap {cap}")
    if n == 0:
        return Verdict(SAT, "oracle", None, "empty instance")
    cons = inst.constraint_relations()
    for t in type_table(inst.family, n):
        if all(project(t, scope) in rel.orbits for scope, rel in cons):
            return Verdict(SAT, "oracle", t)
    return Verdict(UNSAT, "oracle")


# -- certificates ----------------------------------------------------------------

def verify_certificate(inst: Instance, cert: QfType) -> Tuple[bool, str]:
    """Independent check: every scope reads an orbit of its relation off the
    certificate, and the quotient graph avoids all bounds."""
    if cert.arity != inst.n:
        return False, f"certificate has arity {cert.arity}, instance has {inst.n} variables"
    pos = {v: i for i, v in enumerate(inst.variables)}
    for k, c in enumerate(inst.constraints):
        idx = [pos[v] for v in c.scope]
        labels = []
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                labels.append(cert.label(idx[a], idx[b]))
        try:
            t = QfType(len(idx), tuple(labels))
        except ValueError:
            return False, f"constraint {k}: inconsistent labels"
        if t not in inst.relation(c.relation).orbits:
            return False, f"constraint {k}: orbit {t} not in relation {c.relation!r}"
    # quotient built here from scratch rather than via quotient_graph
    reps: List[int] = []
    for i in range(cert.arity):
        if not any(cert.label(r, i) == EQ for r in reps):
            reps.append(i)
    edges = frozenset(
        (a, b) for a, b in itertools.combinations(range(len(reps)), 2) if cert.label(reps[a], reps[b]) == E
    )
    if not realizable(inst.family, FiniteGraph(len(reps), edges)):
        return False, "quotient graph contains a bound"
    return True, ""


@dataclass(frozen=True)
class Realization:
    graph: FiniteGraph
    mapping: Dict[str, int]


def realize_certificate(cert: QfType, variables: Sequence[str], family: Optional[GraphFamily] = None) -> Realization:
    """Vertices are the classes of the certificate; each variable goes to its class."""
    if len(variables) != cert.arity:
        raise ValueError(f"{len(variables)} variable names for a type of arity {cert.arity}")
    graph = quotient_graph(cert)
    if family is not None and not realizable(family, graph):
        raise NotRealizable(f"certificate quotient is not realizable in {family}")
    return Realization(graph, {v: c for v, c in zip(variables, cert.rgs)})


# -- width mode ------------------------------------------------------------------

def decide_width(inst: Instance, k: int = 2, l: Optional[int] = None) -> Verdict:
    """Unsat iff the (k,l)-minimal form is trivial.  A Sat answer is only
    sound for languages of relational width (k,l) and is marked as such."""
    if l is None:
        l = l_value(inst.family)
    m = establish_minimality(inst, k, l)
    if is_trivial(m):
        return Verdict(UNSAT, "width", None, f"({k},{l})-minimal form is trivial")
    return Verdict(SAT, "width", None, f"assumed width ({k},{l})")


# -- shrinking and search ----------------------------------------------------------

def _first_open_pair(engine: Engine) -> Optional[Tuple[Tuple[int, int], int]]:
    for i, j in itertools.combinations(range(engine.n), 2):
        m = engine.pair_set(i, j)
        if m & (m - 1):
            return (i, j), m
    return None


def _engine_certificate(engine: Engine) -> Optional[QfType]:
    pairs = {}
    for i, j in itertools.combinations(range(engine.n), 2):
        (b,) = iter_bits(engine.pair_set(i, j))
        pairs[(i, j)] = Label(b)
    cert = global_type_from_pairs(engine.n, pairs)
    if cert is None or not realizable(engine.family, quotient_graph(cert)):
        return None
    return cert


@dataclass(frozen=True)
class Stuck:
    pair: Tuple[str, str]
    attempted: Tuple[Label, ...]

    def __str__(self):
        return f"stuck at {self.pair}: pinning {'/'.join(x.symbol for x in self.attempted)} trivializes"


def shrink_to_simple(m: MinimalInstance, priority: Sequence[Label] = DEFAULT_PRIORITY):
    """Pin the first multi-valued pair to its highest-priority orbital that
    keeps the instance non-trivial, re-establish, and repeat.  Returns a simple
    MinimalInstance or :class:`Stuck`."""
    if m.k < 2 or is_trivial(m):
        raise NotMinimal("shrinking needs a non-trivial (2,l)-minimal instance")
    engine = m._engine().copy()
    while True:
        found = _first_open_pair(engine)
        if found is None:
            break
        (i, j), allowed = found
        tried = []
        for lab in priority:
            if not allowed >> int(lab) & 1:
                continue
            tried.append(Label(lab))
            trial = engine.copy()
            queue = trial.restrict_pair(i, j, Label(lab))
            if trial.propagate(queue, stop_on_empty=True):
                engine = trial
                break
        else:
            return Stuck((m.variables[i], m.variables[j]), tuple(tried))
    return MinimalInstance(m.family, m.variables, m.k, m.l, tuple(engine.scopes), tuple(engine.masks), m.source_count, engine)


def solve_search(inst: Instance, priority: Sequence[Label] = DEFAULT_PRIORITY, k: int = 2,
                 l: Optional[int] = None) -> Verdict:
    """Complete search: establish (k,l)-minimality, then branch on the first
    multi-valued pair in priority order, re-establishing after each pin."""
    if l is None:
        l = l_value(inst.family)
    if inst.n == 0:
        return Verdict(SAT, "search", None, "empty instance")
    engine, _ = build_engine(inst, max(k, 2), l)
    if not engine.propagate(stop_on_empty=True):
        return Verdict(UNSAT, "search", None, "trivial after establishment")
    stats = {"branches": 0}

    def rec(e: Engine) -> Optional[QfType]:
        found = _first_open_pair(e)
        if found is None:
            cert = _engine_certificate(e)
            if cert is not None and verify_certificate(inst, cert)[0]:
                return cert
            return None
        (i, j), allowed = found
        for lab in priority:
            if not allowed >> int(lab) & 1:
                continue
            stats["branches"] += 1
            trial = e.copy()
            queue = trial.restrict_pair(i, j, Label(lab))
            if trial.propagate(queue, stop_on_empty=True):
                cert = rec(trial)
                if cert is not None:
                    return cert
        return None

    cert = rec(engine)
    if cert is None:
        return Verdict(UNSAT, "search", None, f"{stats['branches']} branches")
    return Verdict(SAT, "search", cert, f"{stats['branches']} branches")


def solve(inst: Instance, mode: str = "search", k: int = 2, l: Optional[int] = None,
          priority: Sequence[Label] = DEFAULT_PRIORITY) -> Verdict:
    if mode == "oracle":
        return oracle(inst)
    if mode == "width":
        return decide_width(inst, k, l)
    if mode == "search":
        return solve_search(inst, priority, k, l)
    raise ValueError(f"unknown mode {mode!r}")


# -- fixtures --------------------------------------------------------------------

def fixture_i1(family: GraphFamily) -> Instance:
    """Two variables forced to be both adjacent and non-adjacent."""
    return make_instance(family, ["v1", "v2"], [(("v1", "v2"), "E"), (("v1", "v2"), "N")])


def fixture_i2(family: GraphFamily) -> Instance:
    """Unsatisfiable instance that survives (2, L-1)-minimality.

    With L = 3: v1 = v2, v2 = v3 but E(v1, v3).  With L > 3: one variable per
    vertex of a largest bound, each pair pinned to the bound's orbital.
    """
    L = l_value(family)
    if L == 3:
        return make_instance(
            family, ["v1", "v2", "v3"],
            [(("v1", "v2"), "="), (("v2", "v3"), "="), (("v1", "v3"), "E")],
        )
    bound = [g for g in sorted_bounds(family) if g.order == L][0]
    names = [f"v{i + 1}" for i in range(L)]
    cons = [
        ((names[i], names[j]), "E" if bound.has_edge(i, j) else "N")
        for i, j in itertools.combinations(range(L), 2)
    ]
    return make_instance(family, names, cons)


def fixtures(family: GraphFamily) -> Dict[str, Instance]:
    name2 = "I2" if l_value(family) == 3 else "I2_bound"
    return {"I1": fixture_i1(family), name2: fixture_i2(family)}
