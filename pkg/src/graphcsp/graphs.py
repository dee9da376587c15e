"""Finite graphs and the catalog of countably infinite homogeneous graphs.

Every homogeneous graph is described here by its finite set of forbidden
induced subgraphs (its *bounds*).  A finite graph embeds into the infinite
graph iff none of the bounds embeds into it as an induced subgraph.

The catalog follows the Lachlan-Woodrow classification:

* ``Random``           -- the random (Rado) graph, no bounds;
* ``Henson(k)``        -- the universal K_k-free graph;
* ``Cliques(s, n)``    -- ``n`` disjoint cliques of size ``s`` (one of them omega);
* ``Complement(F)``    -- edge complement of a Henson or Cliques graph.

Bounds of a complement are taken to be the edge complements of the bounds
of the inner family.  This is an inference from the classification rather
than a listed fact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, Iterable, Iterator, Optional, Tuple, Union

from .errors import InvalidFamily

OMEGA = "omega"

Cardinal = Union[int, str]

MAX_CANONICAL_ORDER = 8


def _pair(i: int, j: int) -> Tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class FiniteGraph:
    """A simple undirected graph on vertices ``0 .. order-1``."""

    order: int
    edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 1:
            raise ValueError(f"graph order must be a positive integer, got {self.order!r}")
        normalized = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.order and 0 <= j < self.order):
                raise ValueError(f"edge ({i}, {j}) outside vertex range")
            normalized.add(_pair(i, j))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_adjacency(cls, matrix) -> "FiniteGraph":
        n = len(matrix)
        edges = set()
        for i in range(n):
            if matrix[i][i]:
                raise ValueError(f"self-loop at vertex {i}")
            for j in range(i + 1, n):
                if bool(matrix[i][j]) != bool(matrix[j][i]):
                    raise ValueError(f"adjacency not symmetric at ({i}, {j})")
                if matrix[i][j]:
                    edges.add((i, j))
        return cls(n, frozenset(edges))

    @property
    def adjacency(self) -> Tuple[Tuple[bool, ...], ...]:
        return tuple(
            tuple(_pair(i, j) in self.edges for j in range(self.order)) for i in range(self.order)
        )

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and _pair(i, j) in self.edges

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def complement(self) -> "FiniteGraph":
        return FiniteGraph(
            self.order,
            frozenset(p for p in itertools.combinations(range(self.order), 2) if p not in self.edges),
        )

    def induced(self, vertices) -> "FiniteGraph":
        """Induced subgraph on ``vertices``, relabelled ``0..len-1`` in the given order."""
        vertices = list(vertices)
        return FiniteGraph(
            len(vertices),
            frozenset(
                (a, b)
                for a, b in itertools.combinations(range(len(vertices)), 2)
                if self.has_edge(vertices[a], vertices[b])
            ),
        )

    def edge_mask(self) -> int:
        """Bitmask over pairs in row-major upper-triangle order."""
        mask = 0
        for bit, (i, j) in enumerate(itertools.combinations(range(self.order), 2)):
            if (i, j) in self.edges:
                mask |= 1 << bit
        return mask

    def canonical_form(self) -> Tuple[int, int]:
        """(order, minimal edge mask over all vertex permutations)."""
        return _canonical(self.order, self.edge_mask())

    def __str__(self):
        return f"Graph(order={self.order}, edges={sorted(self.edges)})"


@lru_cache(maxsize=None)
def _canonical(order: int, mask: int) -> Tuple[int, int]:
    if order > MAX_CANONICAL_ORDER:
        raise ValueError(f"canonical form supported up to order {MAX_CANONICAL_ORDER}")
    pairs = list(itertools.combinations(range(order), 2))
    present = [(i, j) for bit, (i, j) in enumerate(pairs) if mask >> bit & 1]
    index = {p: bit for bit, p in enumerate(pairs)}
    best = None
    for perm in itertools.permutations(range(order)):
        m = 0
        for i, j in present:
            m |= 1 << index[_pair(perm[i], perm[j])]
        if best is None or m < best:
            best = m
    return order, best


def complete_graph(n: int) -> FiniteGraph:
    return FiniteGraph(n, frozenset(itertools.combinations(range(n), 2)))


def null_graph(n: int) -> FiniteGraph:
    return FiniteGraph(n, frozenset())


def path_p3() -> FiniteGraph:
    """Three vertices, two edges, one non-edge."""
    return FiniteGraph(3, frozenset({(0, 1), (1, 2)}))


def isomorphic(g: FiniteGraph, h: FiniteGraph) -> bool:
    return g.order == h.order and len(g.edges) == len(h.edges) and g.canonical_form() == h.canonical_form()


def embeds(pattern: FiniteGraph, host: FiniteGraph) -> bool:
    """True iff ``pattern`` is isomorphic to an induced subgraph of ``host``."""
    if pattern.order > host.order:
        return False
    p_adj = pattern.adjacency
    h_adj = host.adjacency
    p_deg = [sum(row) for row in p_adj]
    h_deg = [sum(row) for row in h_adj]
    p_non = [pattern.order - 1 - d for d in p_deg]
    h_non = [host.order - 1 - d for d in h_deg]
    candidates = [
        [h for h in range(host.order) if h_deg[h] >= p_deg[p] and h_non[h] >= p_non[p]]
        for p in range(pattern.order)
    ]
    # Most constrained pattern vertices first.
    order = sorted(range(pattern.order), key=lambda p: len(candidates[p]))
    image = [-1] * pattern.order
    used = [False] * host.order

    def extend(depth: int) -> bool:
        if depth == len(order):
            return True
        p = order[depth]
        for h in candidates[p]:
            if used[h]:
                continue
            ok = True
            for q in order[:depth]:
                if p_adj[p][q] != h_adj[h][image[q]]:
                    ok = False
                    break
            if not ok:
                continue
            image[p] = h
            used[h] = True
            if extend(depth + 1):
                return True
            used[h] = False
            image[p] = -1
        return False

    return extend(0)


def _check_cardinal(value, name: str) -> Cardinal:
    if value == OMEGA:
        return OMEGA
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InvalidFamily(f"{name} must be a positive integer or {OMEGA!r}, got {value!r}")
    return value


@dataclass(frozen=True)
class GraphFamily:
    """One countably infinite homogeneous graph, identified by its catalog entry.

    Build instances with the classmethods ``random``, ``henson``, ``cliques``
    and ``complement``.
    """

    kind: str
    k: Optional[int] = None
    size: Optional[Cardinal] = None
    count: Optional[Cardinal] = None
    inner: Optional["GraphFamily"] = None

    def __post_init__(self):
        if self.kind == "random":
            if any(v is not None for v in (self.k, self.size, self.count, self.inner)):
                raise InvalidFamily("random family takes no parameters")
        elif self.kind == "henson":
            if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 3:
                raise InvalidFamily(f"Henson graphs need k >= 3, got {self.k!r}")
        elif self.kind == "cliques":
            size = _check_cardinal(self.size, "size")
            count = _check_cardinal(self.count, "count")
            if size != OMEGA and count != OMEGA:
                raise InvalidFamily("Cliques(size, count) needs size or count to be omega")
        elif self.kind == "complement":
            if not isinstance(self.inner, GraphFamily) or self.inner.kind not in ("henson", "cliques"):
                raise InvalidFamily("complement applies to a Henson or Cliques family only")
        else:
            raise InvalidFamily(f"unknown family kind {self.kind!r}")

    @classmethod
    def random(cls) -> "GraphFamily":
        return cls("random")

    @classmethod
    def henson(cls, k: int) -> "GraphFamily":
        return cls("henson", k=k)

    @classmethod
    def cliques(cls, size: Cardinal, count: Cardinal) -> "GraphFamily":
        return cls("cliques", size=size, count=count)

    @classmethod
    def complement_of(cls, inner: "GraphFamily") -> "GraphFamily":
        return cls("complement", inner=inner)

    def __str__(self):
        if self.kind == "random":
            return "Random"
        if self.kind == "henson":
            return f"Henson({self.k})"
        if self.kind == "cliques":
            return f"Cliques(size={self.size}, count={self.count})"
        return f"Complement({self.inner})"

    def to_json(self) -> dict:
        if self.kind == "random":
            return {"family": "random"}
        if self.kind == "henson":
            return {"family": "henson", "k": self.k}
        if self.kind == "cliques":
            return {"family": "cliques", "size": self.size, "count": self.count}
        return {"family": "complement", "of": self.inner.to_json()}

    @classmethod
    def from_json(cls, data) -> "GraphFamily":
        if not isinstance(data, dict) or "family" not in data:
            raise InvalidFamily(f"family block must be an object with a 'family' key, got {data!r}")
        kind = data["family"]
        if kind == "random":
            return cls.random()
        if kind == "henson":
            return cls.henson(data.get("k"))
        if kind == "cliques":
            return cls.cliques(data.get("size"), data.get("count"))
        if kind == "complement":
            inner = cls.from_json(data.get("of"))
            return cls.complement_of(inner)
        raise InvalidFamily(f"unknown family {kind!r}")


def _minimize(graphs: Iterable[FiniteGraph]) -> FrozenSet[FiniteGraph]:
    """Drop duplicates (up to isomorphism) and bounds containing another bound."""
    unique = {}
    for g in graphs:
        unique.setdefault(g.canonical_form(), g)
    items = sorted(unique.values(), key=lambda g: (g.order, g.canonical_form()))
    kept = []
    for g in items:
        if not any(embeds(h, g) for h in kept):
            kept.append(g)
    return frozenset(kept)


@lru_cache(maxsize=None)
def bounds_of(family: GraphFamily) -> FrozenSet[FiniteGraph]:
    """Minimal set of forbidden induced subgraphs of ``family``."""
    if family.kind == "random":
        return frozenset()
    if family.kind == "henson":
        return frozenset({complete_graph(family.k)})
    if family.kind == "cliques":
        graphs = [path_p3()]
        if family.count != OMEGA:
            graphs.append(null_graph(family.count + 1))
        if family.size != OMEGA:
            graphs.append(complete_graph(family.size + 1))
        return _minimize(graphs)
    return frozenset(g.complement() for g in bounds_of(family.inner))


def sorted_bounds(family: GraphFamily):
    return sorted(bounds_of(family), key=lambda g: (g.order, g.canonical_form()))


def l_value(family: GraphFamily) -> int:
    """max(3, largest bound order)."""
    return max([3] + [g.order for g in bounds_of(family)])


def realizable(family: GraphFamily, graph: FiniteGraph) -> bool:
    """True iff ``graph`` embeds into the infinite graph of ``family``."""
    return not any(b.order <= graph.order and embeds(b, graph) for b in bounds_of(family))


@lru_cache(maxsize=None)
def _bound_keys(family: GraphFamily):
    """{order: set of canonical forms} of the bounds."""
    keys = {}
    for g in bounds_of(family):
        keys.setdefault(g.order, set()).add(g.canonical_form())
    return keys


def creates_bound(family: GraphFamily, adjacency, new_vertex: int) -> bool:
    """Does some bound embed into ``adjacency`` using ``new_vertex``?

    ``adjacency`` is a square boolean matrix over vertices ``0..new_vertex``.
    Used for incremental realizability checks during enumeration: if the graph
    without ``new_vertex`` was realizable, the graph with it is realizable iff
    this returns False.
    """
    keys = _bound_keys(family)
    others = range(new_vertex)
    for size, forms in keys.items():
        if size - 1 > new_vertex:
            continue
        for subset in itertools.combinations(others, size - 1):
            verts = subset + (new_vertex,)
            mask = 0
            bit = 0
            for a in range(size):
                for b in range(a + 1, size):
                    if adjacency[verts[a]][verts[b]]:
                        mask |= 1 << bit
                    bit += 1
            if _canonical(size, mask) in forms:
                return True
    return False


def all_graphs(order: int) -> Iterator[FiniteGraph]:
    """Every labelled graph on ``order`` vertices."""
    pairs = list(itertools.combinations(range(order), 2))
    for bits in range(1 << len(pairs)):
        yield FiniteGraph(order, frozenset(p for i, p in enumerate(pairs) if bits >> i & 1))


def graph_catalog(max_order: int):
    """One representative per isomorphism class, orders 1..max_order."""
    seen = {}
    for n in range(1, max_order + 1):
        for g in all_graphs(n):
            seen.setdefault(g.canonical_form(), g)
    return list(seen.values())
