"""Compilation of an infinite-domain instance into a finite-domain one over m-types.

The finite structure has the m-types of the graph family as elements,
a unary relation per (source relation, index map ``i: [r] -> [m]``) and a
binary compatibility relation ``Comp[i|j]`` per pair of index maps
``i, j: [r] -> [m]``.  An instance is translated onto variables that are
increasing m-tuples of source variables; an assignment of m-types to them
is a solution iff it is the family of m-types of one source solution.
Index maps and positions are 0-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .errors import ArityTooLarge, MinimalityMismatch, MTooSmall, TooFewVariables, TooLarge
from .graphs import GraphFamily, l_value
from .instance import Instance
from .minimality import MinimalInstance, iter_bits, type_index
from .orbits import OrbitRelation, QfType, format_orbit, project, type_table
from .verdict import SAT, UNSAT, Verdict

MAX_M = 6
MAX_FINITE_VARIABLES = 2000

IndexMap = Tuple[int, ...]


def index_maps(r: int, m: int) -> Iterator[IndexMap]:
    return itertools.product(range(m), repeat=r)


@lru_cache(maxsize=None)
def _projections(family: GraphFamily, m: int, positions: IndexMap) -> Tuple[QfType, ...]:
    return tuple(project(p, positions) for p in type_table(family, m))


@dataclass
class TypeStructure:
    family: GraphFamily
    m: int
    elements: Tuple[QfType, ...]
    relations: Dict[str, OrbitRelation]
    unary_relations: Dict[Tuple[str, IndexMap], FrozenSet[int]]
    _comp_cache: Dict[Tuple[IndexMap, IndexMap], FrozenSet[Tuple[int, int]]] = field(default_factory=dict, repr=False)

    def unary(self, name: str, i: IndexMap) -> FrozenSet[int]:
        """Elements whose restriction along ``i`` lies in relation ``name``."""
        key = (name, tuple(i))
        if key not in self.unary_relations:
            rel = self.relations[name]
            projs = _projections(self.family, self.m, key[1])
            self.unary_relations[key] = frozenset(p for p, t in enumerate(projs) if t in rel.orbits)
        return self.unary_relations[key]

    def comp(self, i: IndexMap, j: IndexMap) -> FrozenSet[Tuple[int, int]]:
        """Pairs (p, q) whose labels along ``i`` and along ``j`` agree."""
        key = (tuple(i), tuple(j))
        if len(key[0]) != len(key[1]):
            raise ValueError("index maps of Comp must share their length")
        if key not in self._comp_cache:
            pi = _projections(self.family, self.m, key[0])
            pj = _projections(self.family, self.m, key[1])
            by_type: Dict[QfType, List[int]] = {}
            for q, t in enumerate(pj):
                by_type.setdefault(t, []).append(q)
            self._comp_cache[key] = frozenset((p, q) for p, t in enumerate(pi) for q in by_type.get(t, ()))
        return self._comp_cache[key]

    def comp_relations(self) -> Iterator[Tuple[Tuple[int, IndexMap, IndexMap], FrozenSet[Tuple[int, int]]]]:
        for r in range(1, self.m + 1):
            for i in index_maps(r, self.m):
                for j in index_maps(r, self.m):
                    yield (r, i, j), self.comp(i, j)


def default_m(relations: Dict[str, OrbitRelation], family: GraphFamily) -> int:
    arity = max([2] + [rel.arity for rel in relations.values()])
    return max(arity + 1, 3, l_value(family))


def build_type_structure(relations: Dict[str, OrbitRelation], family: GraphFamily, m: Optional[int] = None) -> TypeStructure:
    if m is None:
        m = default_m(relations, family)
    if m > MAX_M:
        raise ArityTooLarge(f"m = {m} exceeds the cap {MAX_M}")
    arity = max([1] + [rel.arity for rel in relations.values()])
    if m < arity:
        raise MTooSmall(f"m = {m} is below the largest relation arity {arity}")
    ts = TypeStructure(family, m, type_table(family, m), dict(relations), {})
    for name, rel in sorted(relations.items()):
        for i in index_maps(rel.arity, m):
            ts.unary(name, i)
    return ts


# -- finite instances --------------------------------------------------------------

@dataclass(frozen=True)
class FiniteConstraint:
    scope: Tuple[int, ...]
    tuples: FrozenSet[Tuple[int, ...]]
    name: str


@dataclass
class TranslatedInstance:
    m: int
    source_variables: Tuple[str, ...]
    images: Tuple[Tuple[int, ...], ...]  # translated variable -> increasing m-tuple of source indices
    constraints: List[FiniteConstraint]
    domain_size: int

    @property
    def variables(self) -> List[str]:
        return [".".join(self.source_variables[v] for v in img) for img in self.images]

    def is_trivial(self) -> bool:
        return any(not c.tuples for c in self.constraints)

    def to_json(self, ts: Optional[TypeStructure] = None) -> dict:
        names = self.variables
        rels: Dict[FrozenSet, str] = {}
        rel_block = {}
        cons = []
        for c in self.constraints:
            if c.tuples not in rels:
                rname = f"{c.name}#{len(rels)}"
                rels[c.tuples] = rname
                rel_block[rname] = {"arity": len(c.scope), "tuples": [list(t) for t in sorted(c.tuples)]}
            cons.append({"scope": [names[v] for v in c.scope], "relation": rels[c.tuples]})
        doc = {"domain": {"family": "finite-types", "m": self.m}}
        if ts is not None:
            doc["source_family"] = ts.family.to_json()
            doc["elements"] = [format_orbit(t) for t in ts.elements]
        doc["relations"] = rel_block
        doc["variables"] = names
        doc["constraints"] = cons
        return doc


def translate_instance(inst: Instance, m: int, ts: Optional[TypeStructure] = None) -> TranslatedInstance:
    """Unary constraints for every source constraint inside some Im(v), one
    Comp constraint per pair v < s and bijection onto Im(v) & Im(s)."""
    n = inst.n
    if n < m:
        raise TooFewVariables(f"{n} variables, m = {m}")
    if ts is None:
        ts = build_type_structure(inst.relations, inst.family, m)
    elif ts.m != m:
        raise ValueError(f"type structure has m = {ts.m}, asked for m = {m}")
    for name in {c.relation for c in inst.constraints}:
        if name not in ts.relations:
            ts.relations[name] = inst.relation(name)
    images = tuple(itertools.combinations(range(n), m))
    constraints: List[FiniteConstraint] = []
    pos = {v: i for i, v in enumerate(inst.variables)}
    for c in inst.constraints:
        j = [pos[v] for v in c.scope]
        rel = inst.relation(c.relation)
        if rel.arity > m:
            raise MTooSmall(f"m = {m} is below the arity {rel.arity} of {c.relation!r}")
        for vi, img in enumerate(images):
            if set(j) <= set(img):
                i = tuple(img.index(x) for x in j)
                elems = ts.unary(c.relation, i)
                constraints.append(FiniteConstraint((vi,), frozenset((p,) for p in elems), f"<{c.relation}@{','.join(map(str, i))}>"))
    for vi, vs in itertools.combinations(range(len(images)), 2):
        shared = sorted(set(images[vi]) & set(images[vs]))
        if not shared:
            continue
        for k in itertools.permutations(shared):
            iv = tuple(images[vi].index(x) for x in k)
            js = tuple(images[vs].index(x) for x in k)
            constraints.append(FiniteConstraint((vi, vs), ts.comp(iv, js), f"Comp[{','.join(map(str, iv))}|{','.join(map(str, js))}]"))
    return TranslatedInstance(m, inst.variables, images, constraints, len(ts.elements))


# -- refinement --------------------------------------------------------------------

def _types_of(source: MinimalInstance, ci: int, images: Sequence[Tuple[int, ...]], m: int) -> FrozenSet[Tuple[int, ...]]:
    """Types(C, u1, ..., uk): per orbit of C, the m-types of its projections to Im(u)."""
    family = source.family
    scope = source.scopes[ci]
    index = type_index(family, m)
    table = type_table(family, len(scope))
    positions = [tuple(scope.index(x) for x in img) for img in images]
    out = set()
    for b in iter_bits(source.masks[ci]):
        t = table[b]
        out.add(tuple(index[project(t, p)] for p in positions))
    return frozenset(out)


def _check_source(source: MinimalInstance, m: int):
    n = len(source.variables)
    if source.k < min(2 * m, n) or source.l < 3 * m:
        raise MinimalityMismatch(f"source is ({source.k},{source.l})-minimal, refinement needs ({2 * m},{3 * m})")
    size = min(3 * m, n)
    covered = set()
    for s in source.scopes:
        if len(s) >= size:
            covered.update(itertools.combinations(s, size))
    if len(covered) < len(list(itertools.combinations(range(n), size))):
        raise MinimalityMismatch("source does not cover every set of 3m variables")


def refine_translation(source: MinimalInstance, translated: TranslatedInstance) -> TranslatedInstance:
    """Add the Types constraints read off the (2m,3m)-minimal source.

    Unary and binary ones are intersected into the existing unary and Comp
    constraints (all covering source constraints give the same sets there).
    Ternary ones are added once per distinct set: different covering
    constraints can disagree on three m-sets, and intersecting them could
    break agreement on pairs.
    """
    m = translated.m
    _check_source(source, m)
    images = translated.images
    cover_sets = [frozenset(s) for s in source.scopes]

    def covering(vars_needed: FrozenSet[int]) -> List[int]:
        return [ci for ci, s in enumerate(cover_sets) if vars_needed <= s]

    unary: Dict[int, FrozenSet[Tuple[int, ...]]] = {}
    for vi, img in enumerate(images):
        sets = [_types_of(source, ci, [img], m) for ci in covering(frozenset(img))]
        inter = frozenset.intersection(*sets) if sets else frozenset((p,) for p in range(translated.domain_size))
        unary[vi] = inter
    binary: Dict[Tuple[int, int], FrozenSet[Tuple[int, ...]]] = {}
    for a, b in itertools.combinations(range(len(images)), 2):
        need = frozenset(images[a]) | frozenset(images[b])
        sets = [_types_of(source, ci, [images[a], images[b]], m) for ci in covering(need)]
        if sets:
            binary[(a, b)] = frozenset.intersection(*sets)

    out: List[FiniteConstraint] = []
    for c in translated.constraints:
        if len(c.scope) == 1:
            out.append(FiniteConstraint(c.scope, c.tuples & unary[c.scope[0]], c.name + "&Types"))
        elif len(c.scope) == 2 and c.scope in binary:
            out.append(FiniteConstraint(c.scope, c.tuples & binary[c.scope], c.name + "&Types"))
        else:
            out.append(c)
    for vi in range(len(images)):
        out.append(FiniteConstraint((vi,), unary[vi], "Types1"))
    for key, tuples in binary.items():
        out.append(FiniteConstraint(key, tuples, "Types2"))
    for a, b, c in itertools.combinations(range(len(images)), 3):
        need = frozenset(images[a]) | frozenset(images[b]) | frozenset(images[c])
        seen = set()
        for ci in covering(need):
            tuples = _types_of(source, ci, [images[a], images[b], images[c]], m)
            if tuples not in seen:
                seen.add(tuples)
                out.append(FiniteConstraint((a, b, c), tuples, "Types3"))
    return TranslatedInstance(m, translated.source_variables, images, out, translated.domain_size)


# -- finite solving ----------------------------------------------------------------

def _propagate(domains: List[set], constraints: Sequence[FiniteConstraint], by_var: Dict[int, List[int]]) -> bool:
    """Generalized arc consistency; False on a domain wipe-out."""
    queue = list(range(len(constraints)))
    queued = set(queue)
    while queue:
        ci = queue.pop()
        queued.discard(ci)
        c = constraints[ci]
        alive = [t for t in c.tuples if all(x in domains[v] for v, x in zip(c.scope, t))]
        for pos, v in enumerate(c.scope):
            support = {t[pos] for t in alive}
            if not domains[v] <= support:
                domains[v] &= support
                if not domains[v]:
                    return False
                for cj in by_var[v]:
                    if cj != ci and cj not in queued:
                        queued.add(cj)
                        queue.append(cj)
    return True


def finite_solve(ts: TypeStructure, ti: TranslatedInstance) -> Verdict:
    """Exact verdict for the finite instance: arc consistency plus backtracking."""
    nvars = len(ti.images)
    if nvars > MAX_FINITE_VARIABLES:
        raise TooLarge(f"{nvars} translated variables exceed the cap {MAX_FINITE_VARIABLES}")
    names = ti.variables
    if nvars == 0:
        return Verdict(SAT, "finite", None, "no variables", {})
    cons = list(ti.constraints)
    by_var: Dict[int, List[int]] = {v: [] for v in range(nvars)}
    for ci, c in enumerate(cons):
        for v in set(c.scope):
            by_var[v].append(ci)
    domains = [set(range(len(ts.elements))) for _ in range(nvars)]
    if not _propagate(domains, cons, by_var):
        return Verdict(UNSAT, "finite")

    def rec(doms: List[set]) -> Optional[List[set]]:
        open_vars = [v for v in range(nvars) if len(doms[v]) > 1]
        if not open_vars:
            return doms
        v = min(open_vars, key=lambda x: (len(doms[x]), x))
        for value in sorted(doms[v]):
            trial = [set(d) for d in doms]
            trial[v] = {value}
            if _propagate(trial, cons, by_var):
                found = rec(trial)
                if found is not None:
                    return found
        return None

    result = rec(domains)
    if result is None:
        return Verdict(UNSAT, "finite")
    assignment = {names[v]: next(iter(result[v])) for v in range(nvars)}
    return Verdict(SAT, "finite", None, "", assignment)


def check_finite_assignment(ti: TranslatedInstance, assignment: Dict[str, int]) -> bool:
    names = ti.variables
    values = [assignment[nm] for nm in names]
    return all(tuple(values[v] for v in c.scope) in c.tuples for c in ti.constraints)


# -- finite minimality ---------------------------------------------------------------

def finite_iter_violations(ti: TranslatedInstance, k: int, l: int):
    """Literal (k,l)-minimality check on a finite instance: every set of at
    most l variables inside a scope, and equal projections to every W with
    |W| <= k shared by two constraints."""
    n = len(ti.images)
    names = ti.variables
    scopes = [frozenset(c.scope) for c in ti.constraints]
    size = min(l, n)
    for subset in itertools.combinations(range(n), size):
        s = frozenset(subset)
        if not any(s <= sc for sc in scopes):
            yield ("uncovered", tuple(names[v] for v in subset))
    cover: Dict[Tuple[int, ...], List[Tuple[int, FrozenSet]]] = {}
    for ci, c in enumerate(ti.constraints):
        distinct = sorted(set(c.scope))
        for r in range(1, min(k, len(distinct)) + 1):
            for w in itertools.combinations(distinct, r):
                pos = [c.scope.index(x) for x in w]
                proj = frozenset(tuple(t[p] for p in pos) for t in c.tuples)
                cover.setdefault(w, []).append((ci, proj))
    for w in sorted(cover):
        entries = cover[w]
        for (a, pa), (b, pb) in itertools.combinations(entries, 2):
            if pa != pb:
                yield ("projection", tuple(names[v] for v in w), (a, b))


def finite_verify_minimality(ti: TranslatedInstance, k: int = 2, l: int = 3):
    for v in finite_iter_violations(ti, k, l):
        return False, v
    return True, None
