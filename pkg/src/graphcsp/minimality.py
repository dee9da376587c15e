"""(k,l)-minimality: covering every l-set of variables and making all
constraints agree on their projections to every shared k-set.

Relations inside the engine are bitmasks over the per-(family, arity) type
table of :func:`graphcsp.orbits.type_table`.  Constraint scopes are
normalized to sorted distinct variable indices; a scope that repeats a
variable keeps only the orbits with ``=`` at the repeated positions.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .errors import ArityTooLarge, NotMinimal, NotSimple
from .graphs import GraphFamily, realizable
from .instance import Constraint, Instance
from .orbits import (
    DEFAULT_MAX_ARITY,
    EQ,
    Label,
    OrbitRelation,
    QfType,
    enumerate_types,
    project,
    quotient_graph,
    type_table,
)
from .verdict import SAT, UNSAT, Verdict


# -- mask helpers --------------------------------------------------------------

@lru_cache(maxsize=None)
def type_index(family: GraphFamily, r: int) -> Dict[QfType, int]:
    return {t: i for i, t in enumerate(type_table(family, r))}


def full_mask(family: GraphFamily, r: int) -> int:
    return (1 << len(type_table(family, r))) - 1


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(rel: OrbitRelation, family: GraphFamily) -> int:
    index = type_index(family, rel.arity)
    m = 0
    for t in rel.orbits:
        m |= 1 << index[t]
    return m


def relation_of(mask: int, family: GraphFamily, r: int) -> OrbitRelation:
    table = type_table(family, r)
    return OrbitRelation(r, frozenset(table[i] for i in iter_bits(mask)))


@lru_cache(maxsize=None)
def _proj_map(family: GraphFamily, r: int, positions: Tuple[int, ...]) -> Tuple[int, ...]:
    target = type_index(family, len(positions))
    return tuple(target[project(t, positions)] for t in type_table(family, r))


@lru_cache(maxsize=1 << 18)
def project_mask(family: GraphFamily, r: int, positions: Tuple[int, ...], mask: int) -> int:
    pm = _proj_map(family, r, positions)
    out = 0
    for i in iter_bits(mask):
        out |= 1 << pm[i]
    return out


@lru_cache(maxsize=None)
def _preimages(family: GraphFamily, r: int, positions: Tuple[int, ...]) -> Tuple[int, ...]:
    pm = _proj_map(family, r, positions)
    out = [0] * len(type_table(family, len(positions)))
    for i, j in enumerate(pm):
        out[j] |= 1 << i
    return tuple(out)


@lru_cache(maxsize=1 << 18)
def preimage_mask(family: GraphFamily, r: int, positions: Tuple[int, ...], target: int) -> int:
    pre = _preimages(family, r, positions)
    out = 0
    for j in iter_bits(target):
        out |= pre[j]
    return out


def normalize_constraint(family: GraphFamily, scope: Sequence[int], rel: OrbitRelation) -> Tuple[Tuple[int, ...], int]:
    """(sorted distinct variables, mask) for a constraint over variable indices.

    Orbits are kept only if they put ``=`` on every pair of positions that
    hold the same variable.
    """
    distinct = sorted(set(scope))
    rank = {v: i for i, v in enumerate(distinct)}
    pattern = tuple(rank[v] for v in scope)
    return tuple(distinct), _normalize_keep(family, rel, pattern)


@lru_cache(maxsize=1 << 16)
def _normalize_keep(family: GraphFamily, rel: OrbitRelation, pattern: Tuple[int, ...]) -> int:
    width = max(pattern) + 1
    first = tuple(pattern.index(c) for c in range(width))
    index = type_index(family, width)
    pairs = list(itertools.combinations(range(len(pattern)), 2))
    m = 0
    for t in rel.orbits:
        if any(pattern[p] == pattern[q] and t.label(p, q) != EQ for p, q in pairs):
            continue
        m |= 1 << index[project(t, first)]
    return m


# -- the engine ----------------------------------------------------------------

class Engine:
    """Mutable working state of one establishment run.

    ``cover[W]`` lists ``(constraint, positions of W inside its scope)`` for
    every variable set ``W`` with ``1 <= |W| <= k`` inside some scope.
    """

    def __init__(self, family: GraphFamily, n: int, k: int):
        self.family = family
        self.n = n
        self.k = k
        self.scopes: List[Tuple[int, ...]] = []
        self.masks: List[int] = []
        self.subsets: List[List[Tuple[Tuple[int, ...], Tuple[int, ...]]]] = []
        self.cover: Dict[Tuple[int, ...], List[Tuple[int, Tuple[int, ...]]]] = {}

    def copy(self) -> "Engine":
        other = Engine.__new__(Engine)
        other.family, other.n, other.k = self.family, self.n, self.k
        other.scopes = self.scopes
        other.subsets = self.subsets
        other.cover = self.cover
        other.masks = list(self.masks)
        return other

    def add(self, scope: Tuple[int, ...], mask: int) -> int:
        ci = len(self.scopes)
        self.scopes.append(scope)
        self.masks.append(mask)
        subs = []
        for size in range(1, min(self.k, len(scope)) + 1):
            for pos in itertools.combinations(range(len(scope)), size):
                w = tuple(scope[p] for p in pos)
                subs.append((w, pos))
                self.cover.setdefault(w, []).append((ci, pos))
        self.subsets.append(subs)
        return ci

    def projection(self, ci: int, pos: Tuple[int, ...]) -> int:
        return project_mask(self.family, len(self.scopes[ci]), pos, self.masks[ci])

    def trivial(self) -> bool:
        return any(m == 0 for m in self.masks)

    def propagate(self, queue: Optional[Sequence[Tuple[int, ...]]] = None, stop_on_empty: bool = False) -> bool:
        """Run the filtering to its fixpoint.  Returns False iff some relation
        became empty (with ``stop_on_empty`` the run ends right there)."""
        cover = self.cover
        masks = self.masks
        scopes = self.scopes
        family = self.family
        if queue is None:
            queue = [w for w, entries in cover.items() if len(entries) > 1]
        heap = list(queue)
        heapq.heapify(heap)
        queued = set(heap)
        while heap:
            w = heapq.heappop(heap)
            queued.discard(w)
            entries = cover[w]
            projs = [project_mask(family, len(scopes[ci]), pos, masks[ci]) for ci, pos in entries]
            inter = projs[0]
            for p in projs[1:]:
                inter &= p
            for (ci, pos), p in zip(entries, projs):
                if p == inter:
                    continue
                new = masks[ci] & preimage_mask(family, len(scopes[ci]), pos, inter)
                masks[ci] = new
                if new == 0 and stop_on_empty:
                    return False
                for w2, _ in self.subsets[ci]:
                    if w2 != w and w2 not in queued and len(cover[w2]) > 1:
                        queued.add(w2)
                        heapq.heappush(heap, w2)
        return not self.trivial()

    def pair_set(self, i: int, j: int) -> int:
        """Union over covering constraints of the 2-type masks on {i, j}."""
        w = (i, j) if i < j else (j, i)
        out = 0
        for ci, pos in self.cover.get(w, ()):
            out |= self.projection(ci, pos)
        return out

    def pair_sets_agree(self, i: int, j: int) -> bool:
        w = (i, j) if i < j else (j, i)
        projs = {self.projection(ci, pos) for ci, pos in self.cover.get(w, ())}
        return len(projs) == 1

    def restrict_pair(self, i: int, j: int, label: Label) -> List[Tuple[int, ...]]:
        """Keep only orbits giving ``label`` to the pair; returns the variable
        sets to re-examine."""
        w = (i, j) if i < j else (j, i)
        target = 1 << int(label)  # 2-type table order is =, E, N
        touched = []
        for ci, pos in self.cover[w]:
            r = len(self.scopes[ci])
            new = self.masks[ci] & preimage_mask(self.family, r, pos, target)
            if new != self.masks[ci]:
                self.masks[ci] = new
                touched.extend(w2 for w2, _ in self.subsets[ci] if len(self.cover[w2]) > 1)
        return sorted(set(touched))


def build_engine(inst: Instance, k: int, l: Optional[int], universal: bool = True) -> Tuple[Engine, int]:
    """Engine holding the normalized constraints of ``inst`` plus, when
    ``universal``, one full constraint per uncovered min(l, n)-set.
    Returns the engine and the number of source constraints."""
    family = inst.family
    n = inst.n
    engine = Engine(family, n, k)
    for scope, rel in inst.constraint_relations():
        s, m = normalize_constraint(family, scope, rel)
        engine.add(s, m)
    source = len(engine.scopes)
    if universal and n > 0:
        size = min(l, n)
        if size > DEFAULT_MAX_ARITY:
            raise ArityTooLarge(f"l = {l} exceeds the enumeration cap {DEFAULT_MAX_ARITY}")
        covered = set()
        for s in engine.scopes[:source]:
            if len(s) >= size:
                covered.update(itertools.combinations(s, size))
        full = full_mask(family, size)
        for subset in itertools.combinations(range(n), size):
            if subset not in covered:
                engine.add(subset, full)
    return engine, source


# -- results -------------------------------------------------------------------

@dataclass
class MinimalInstance:
    """Output of :func:`establish_minimality`: normalized constraints with
    their remaining orbit sets, and the pair projections."""

    family: GraphFamily
    variables: Tuple[str, ...]
    k: int
    l: int
    scopes: Tuple[Tuple[int, ...], ...]
    masks: Tuple[int, ...]
    source_count: int
    engine: Optional[Engine] = field(default=None, repr=False, compare=False)

    def relation(self, ci: int) -> OrbitRelation:
        return relation_of(self.masks[ci], self.family, len(self.scopes[ci]))

    @property
    def constraints(self) -> List[Tuple[Tuple[str, ...], OrbitRelation]]:
        return [(tuple(self.variables[v] for v in s), self.relation(ci)) for ci, s in enumerate(self.scopes)]

    def _engine(self) -> Engine:
        if self.engine is None:
            e = Engine(self.family, len(self.variables), max(self.k, 2))
            for s, m in zip(self.scopes, self.masks):
                e.add(s, m)
            self.engine = e
        return self.engine

    def pair(self, i: int, j: int) -> FrozenSet[Label]:
        """P_{i,j}: the orbitals the constraints allow on (v_i, v_j), as the
        union over covering constraints (they coincide when minimal)."""
        if i == j:
            return frozenset({EQ})
        m = self._engine().pair_set(i, j)
        labels = [Label(b) for b in iter_bits(m)]
        # stored for (min, max); orientation does not matter for a symmetric label
        return frozenset(labels)

    @property
    def pair_projections(self) -> Dict[Tuple[int, int], FrozenSet[Label]]:
        n = len(self.variables)
        return {(i, j): self.pair(i, j) for i, j in itertools.combinations(range(n), 2)}

    def to_instance(self) -> Instance:
        rels = {}
        cons = []
        for ci, (scope, rel) in enumerate(self.constraints):
            name = f"c{ci}"
            rels[name] = rel
            cons.append(Constraint(scope, name))
        return Instance(self.family, self.variables, rels, tuple(cons))


def _check_kl(k: int, l: int, n: int):
    if not (isinstance(k, int) and isinstance(l, int) and 1 <= k <= l):
        raise ValueError(f"need 1 <= k <= l, got k={k!r}, l={l!r}")
    if min(l, n) > DEFAULT_MAX_ARITY:
        raise ArityTooLarge(f"l = {l} exceeds the enumeration cap {DEFAULT_MAX_ARITY}")


def establish_minimality(inst: Instance, k: int, l: int) -> MinimalInstance:
    """Add universal constraints for uncovered l-sets, then delete orbits until
    all constraints agree on every shared set of at most k variables.

    The deletions are driven by a worklist of variable sets W, taken in
    lexicographic order; each step intersects the projections of all
    constraints covering W.  The result is the greatest fixpoint, so it does
    not depend on the order.
    """
    _check_kl(k, l, inst.n)
    engine, source = build_engine(inst, k, l)
    engine.propagate()
    return _wrap(inst, engine, k, l, source)


def _wrap(inst: Instance, engine: Engine, k: int, l: int, source: int) -> MinimalInstance:
    return MinimalInstance(
        inst.family, inst.variables, k, l, tuple(engine.scopes), tuple(engine.masks), source,
        engine if engine.k >= 2 else None,
    )


def with_universal_constraints(inst: Instance, l: int) -> Instance:
    """The instance plus one full constraint per uncovered min(l, n)-set, as
    named relations ``all<r>``."""
    engine, source = build_engine(inst, 1, l)
    extra = engine.scopes[source:]
    if not extra:
        return inst
    size = len(extra[0])
    name = f"all{size}"
    rel = enumerate_types(inst.family, size)
    return inst.with_constraints(
        [Constraint(tuple(inst.variables[v] for v in s), name) for s in extra], {name: rel}
    )


def is_trivial(m) -> bool:
    masks = m.masks if isinstance(m, MinimalInstance) else m
    return any(x == 0 for x in masks)


def is_simple(m: MinimalInstance) -> bool:
    return all(len(p) == 1 for p in m.pair_projections.values())


@dataclass(frozen=True)
class Violation:
    kind: str  # "uncovered" | "projection"
    variables: Tuple[str, ...]
    constraints: Tuple[int, ...] = ()

    def __str__(self):
        vs = "{" + ",".join(self.variables) + "}"
        if self.kind == "uncovered":
            return f"uncovered variable set {vs}"
        a, b = self.constraints
        return f"constraints {a} and {b} disagree on {vs}"


def _as_engine(x, k: int) -> Tuple[Engine, Tuple[str, ...]]:
    if isinstance(x, MinimalInstance):
        e = Engine(x.family, len(x.variables), k)
        for s, m in zip(x.scopes, x.masks):
            e.add(s, m)
        return e, x.variables
    engine, _ = build_engine(x, k, None, universal=False)
    return engine, x.variables


def iter_violations(inst, k: int, l: int) -> Iterator[Violation]:
    """Every violation of the two minimality conditions, checked literally:
    uncovered sets of at most l variables (only the maximal size is listed),
    then, for each W with |W| <= k in lexicographic order, each pair of
    covering constraints whose projections to W differ."""
    engine, names = _as_engine(inst, k)
    n = len(names)
    size = min(l, n)
    covered = set()
    for s in engine.scopes:
        if len(s) >= size:
            covered.update(itertools.combinations(s, size))
    for subset in itertools.combinations(range(n), size):
        if subset not in covered:
            yield Violation("uncovered", tuple(names[v] for v in subset))
    for w in sorted(engine.cover):
        entries = engine.cover[w]
        projs = [engine.projection(ci, pos) for ci, pos in entries]
        for (a, pa), (b, pb) in itertools.combinations(zip([ci for ci, _ in entries], projs), 2):
            if pa != pb:
                yield Violation("projection", tuple(names[v] for v in w), (a, b))


def verify_minimality(inst, k: int, l: int) -> Tuple[bool, Optional[Violation]]:
    """(True, None) if (k,l)-minimal, else (False, first violation)."""
    for v in iter_violations(inst, k, l):
        return False, v
    return True, None


# -- simple instances ----------------------------------------------------------

def global_type_from_pairs(n: int, pairs) -> Optional[QfType]:
    """Global type whose pair labels are ``pairs[(i, j)]``; None when ``=``
    is not transitive or labels differ inside a class pair."""
    if n == 0:
        return None
    labels = tuple(pairs[(i, j)] for i, j in itertools.combinations(range(n), 2))
    try:
        return QfType(n, labels)
    except ValueError:
        return None


def quotient_and_check(m: MinimalInstance) -> Verdict:
    """Read the global type off a simple instance and test its quotient."""
    if is_trivial(m):
        raise NotMinimal("instance is trivial")
    n = len(m.variables)
    pairs = {}
    for (i, j), p in m.pair_projections.items():
        if not p:
            raise NotMinimal(f"pair ({m.variables[i]}, {m.variables[j]}) has no orbital")
        if len(p) != 1:
            raise NotSimple(f"pair ({m.variables[i]}, {m.variables[j]}) allows {sorted(x.symbol for x in p)}")
        if not m._engine().pair_sets_agree(i, j):
            raise NotMinimal(f"constraints disagree on ({m.variables[i]}, {m.variables[j]})")
        (pairs[(i, j)],) = p
    if n == 0:
        return Verdict(SAT, "width", None, "empty instance")
    cert = global_type_from_pairs(n, pairs)
    if cert is None:
        return Verdict(UNSAT, "width", None, "pair labels do not form a consistent type")
    if not realizable(m.family, quotient_graph(cert)):
        return Verdict(UNSAT, "width", None, "quotient graph contains a bound")
    return Verdict(SAT, "width", cert)
