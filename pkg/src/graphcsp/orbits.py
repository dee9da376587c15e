"""Orbits of tuples (quantifier-free types) and relations as finite orbit sets.

Over a homogeneous graph the orbit of an r-tuple is determined by the pairwise
labels of its entries: ``=`` (equal), ``E`` (edge) or ``N`` (non-edge).  A
:class:`QfType` stores exactly this: the labels of the position pairs
``(0,1), (0,2), ..., (0,r-1), (1,2), ..., (r-2,r-1)``.  The partition of the
positions into classes is the set of ``=``-pairs.  Positions are 0-based
throughout the Python API; orbit strings list the pair labels in the order
above, e.g. ``"E,N,N,N,N,="`` for a 4-type whose last two entries coincide.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import ArityMismatch, ArityTooLarge, IndexOutOfRange, ParseError
from .graphs import FiniteGraph, GraphFamily, creates_bound, realizable

DEFAULT_MAX_ARITY = 8


class Label(enum.IntEnum):
    EQ = 0
    E = 1
    N = 2

    @property
    def symbol(self) -> str:
        return "=" if self is Label.EQ else self.name

    @classmethod
    def parse(cls, text: str) -> "Label":
        text = text.strip()
        if text in ("=", "EQ"):
            return cls.EQ
        if text == "E":
            return cls.E
        if text == "N":
            return cls.N
        raise ParseError(f"unknown orbital label {text!r}")

    def __str__(self):
        return self.symbol


EQ, E, N = Label.EQ, Label.E, Label.N


def n_pairs(arity: int) -> int:
    return arity * (arity - 1) // 2


def pair_index(i: int, j: int, arity: int) -> int:
    """Index of position pair ``(i, j)``, ``i < j``, in row-major order."""
    return i * arity - i * (i + 1) // 2 + (j - i - 1)


@lru_cache(maxsize=None)
def _pairs(arity: int) -> Tuple[Tuple[int, int], ...]:
    return tuple(itertools.combinations(range(arity), 2))


def _rgs_from_labels(arity: int, labels) -> Optional[Tuple[int, ...]]:
    """Restricted growth string of the ``=``-classes, or None if inconsistent."""
    rgs = [-1] * arity
    reps: List[int] = []
    for p in range(arity):
        for c, rep in enumerate(reps):
            if labels[pair_index(rep, p, arity)] == EQ:
                rgs[p] = c
                break
        else:
            rgs[p] = len(reps)
            reps.append(p)
    for (i, j), lab in zip(_pairs(arity), labels):
        if (rgs[i] == rgs[j]) != (lab == EQ):
            return None
        if lab != EQ:
            ri, rj = reps[rgs[i]], reps[rgs[j]]
            a, b = (ri, rj) if ri < rj else (rj, ri)
            if labels[pair_index(a, b, arity)] != lab:
                return None
    return tuple(rgs)


@dataclass(frozen=True)
class QfType:
    """Orbit of an r-tuple: labels of all position pairs.

    Construction checks that ``=`` is an equivalence relation and that labels
    are constant across classes.  Realizability in a particular graph is a
    separate question, see :meth:`is_realizable_in` and :func:`make_type`.
    """

    arity: int
    labels: Tuple[Label, ...]

    def __post_init__(self):
        if not isinstance(self.arity, int) or self.arity < 1:
            raise ValueError(f"arity must be a positive integer, got {self.arity!r}")
        labels = tuple(Label(x) for x in self.labels)
        if len(labels) != n_pairs(self.arity):
            raise ValueError(f"arity {self.arity} needs {n_pairs(self.arity)} pair labels, got {len(labels)}")
        if _rgs_from_labels(self.arity, labels) is None:
            raise ValueError(f"inconsistent equality pattern {format_labels(labels)!r}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def _trusted(cls, arity: int, labels: Tuple[Label, ...]) -> "QfType":
        obj = object.__new__(cls)
        object.__setattr__(obj, "arity", arity)
        object.__setattr__(obj, "labels", labels)
        return obj

    @classmethod
    def from_partition(cls, rgs: Sequence[int], class_labels: Dict[Tuple[int, int], Label]) -> "QfType":
        """Build from a class assignment and labels on pairs of distinct classes."""
        arity = len(rgs)
        labels = []
        for i, j in _pairs(arity):
            a, b = rgs[i], rgs[j]
            if a == b:
                labels.append(EQ)
            else:
                lab = Label(class_labels[(a, b) if a < b else (b, a)])
                if lab == EQ:
                    raise ValueError("distinct classes cannot be labelled '='")
                labels.append(lab)
        return cls(arity, tuple(labels))

    def label(self, i: int, j: int) -> Label:
        if i == j:
            return EQ
        if i > j:
            i, j = j, i
        return self.labels[pair_index(i, j, self.arity)]

    @property
    def rgs(self) -> Tuple[int, ...]:
        return _rgs_cached(self.arity, self.labels)

    @property
    def partition(self) -> Tuple[Tuple[int, ...], ...]:
        rgs = self.rgs
        classes: List[List[int]] = [[] for _ in range(max(rgs) + 1)]
        for p, c in enumerate(rgs):
            classes[c].append(p)
        return tuple(tuple(c) for c in classes)

    @property
    def class_labels(self) -> Dict[Tuple[int, int], Label]:
        reps = [c[0] for c in self.partition]
        return {(a, b): self.label(reps[a], reps[b]) for a, b in itertools.combinations(range(len(reps)), 2)}

    def sort_key(self):
        """Enumeration order: positions left to right, joining an existing class
        before opening a new one, new-class labels E before N."""
        return _sort_key_cached(self.arity, self.labels)

    def is_realizable_in(self, family: GraphFamily) -> bool:
        return type_realizable(self, family)

    def __str__(self):
        return format_labels(self.labels)

    def __repr__(self):
        return f"QfType({self.arity}, {format_labels(self.labels)!r})"


@lru_cache(maxsize=None)
def _rgs_cached(arity, labels):
    return _rgs_from_labels(arity, labels)


@lru_cache(maxsize=None)
def _sort_key_cached(arity, labels):
    rgs = _rgs_from_labels(arity, labels)
    reps: List[int] = []
    key = []
    for p in range(arity):
        c = rgs[p]
        if c < len(reps):
            key.append((c,))
        else:
            key.append((c,) + tuple(int(labels[pair_index(r, p, arity)]) for r in reps))
            reps.append(p)
    return tuple(key)


def format_labels(labels: Iterable[Label]) -> str:
    return ",".join(Label(x).symbol for x in labels)


def format_orbit(t: QfType) -> str:
    return format_labels(t.labels)


def _arity_for_count(count: int) -> Optional[int]:
    r = 1
    while n_pairs(r) < count:
        r += 1
    return r if n_pairs(r) == count else None


def parse_orbit(text: str, arity: Optional[int] = None) -> QfType:
    """Parse a comma-separated pair-label list.

    The ``=`` pairs must already be transitively closed and labels must agree
    across classes; anything else is rejected rather than repaired.
    """
    text = text.strip()
    parts = [] if text in ("", "-") else text.split(",")
    labels = tuple(Label.parse(p) for p in parts)
    inferred = _arity_for_count(len(labels))
    if arity is None:
        if inferred is None:
            raise ParseError(f"{len(labels)} labels do not match any arity", text)
        arity = inferred
    elif n_pairs(arity) != len(labels):
        raise ParseError(f"arity {arity} needs {n_pairs(arity)} labels, got {len(labels)}", text)
    if _rgs_from_labels(arity, labels) is None:
        raise ParseError("inconsistent labeling: '=' is not an equivalence or labels differ across a class", text)
    return QfType._trusted(arity, labels)


def quotient_graph(t: QfType) -> FiniteGraph:
    """One vertex per class, edge iff the class pair is labelled E."""
    rgs = t.rgs
    n_classes = max(rgs) + 1
    edges = set()
    for (i, j), lab in zip(_pairs(t.arity), t.labels):
        if lab == E:
            edges.add((rgs[i], rgs[j]))
    return FiniteGraph(n_classes, frozenset(edges))


@lru_cache(maxsize=None)
def _realizable_cached(family: GraphFamily, arity: int, labels) -> bool:
    return realizable(family, quotient_graph(QfType._trusted(arity, labels)))


def type_realizable(t: QfType, family: GraphFamily) -> bool:
    return _realizable_cached(family, t.arity, t.labels)


def make_type(arity: int, labels, family: Optional[GraphFamily] = None) -> QfType:
    """Validated constructor; also checks realizability when ``family`` is given."""
    t = QfType(arity, tuple(labels))
    if family is not None and not type_realizable(t, family):
        raise ValueError(f"type {t} is not realizable in {family}")
    return t


@lru_cache(maxsize=200_000)
def _project_labels(arity: int, labels, positions: Tuple[int, ...]):
    out = []
    for a, b in itertools.combinations(range(len(positions)), 2):
        i, j = positions[a], positions[b]
        if i == j:
            out.append(EQ)
        elif i < j:
            out.append(labels[pair_index(i, j, arity)])
        else:
            out.append(labels[pair_index(j, i, arity)])
    return tuple(out)


def project(t: QfType, positions: Sequence[int]) -> QfType:
    """Type induced on ``positions`` (0-based, repeats allowed, order kept)."""
    positions = tuple(positions)
    if not positions:
        raise IndexOutOfRange("projection needs at least one position")
    for p in positions:
        if not isinstance(p, int) or not 0 <= p < t.arity:
            raise IndexOutOfRange(f"position {p!r} outside arity {t.arity}")
    return QfType._trusted(len(positions), _project_labels(t.arity, t.labels, positions))


@dataclass(frozen=True)
class OrbitRelation:
    """A relation of a first-order expansion, as the set of its orbits."""

    arity: int
    orbits: FrozenSet[QfType] = frozenset()

    def __post_init__(self):
        orbits = frozenset(self.orbits)
        for t in orbits:
            if t.arity != self.arity:
                raise ArityMismatch(f"orbit {t} has arity {t.arity}, relation has arity {self.arity}")
        object.__setattr__(self, "orbits", orbits)

    def __iter__(self) -> Iterator[QfType]:
        return iter(self.sorted())

    def __len__(self):
        return len(self.orbits)

    def __contains__(self, t):
        return t in self.orbits

    def sorted(self) -> List[QfType]:
        return sorted(self.orbits, key=QfType.sort_key)

    def strings(self) -> List[str]:
        return [format_orbit(t) for t in self.sorted()]

    @classmethod
    def from_strings(cls, arity: int, strings: Iterable[str]) -> "OrbitRelation":
        return cls(arity, frozenset(parse_orbit(s, arity) for s in strings))

    def __str__(self):
        return "{" + "; ".join(self.strings()) + "}"


def relation_project(rel: OrbitRelation, positions: Sequence[int]) -> OrbitRelation:
    positions = tuple(positions)
    if not positions:
        raise IndexOutOfRange("projection needs at least one position")
    for p in positions:
        if not isinstance(p, int) or not 0 <= p < rel.arity:
            raise IndexOutOfRange(f"position {p!r} outside arity {rel.arity}")
    return OrbitRelation(len(positions), frozenset(project(t, positions) for t in rel.orbits))


def permute(rel: OrbitRelation, perm: Sequence[int]) -> OrbitRelation:
    """Coordinate permutation: new position ``a`` reads old position ``perm[a]``."""
    if sorted(perm) != list(range(rel.arity)):
        raise IndexOutOfRange(f"{list(perm)} is not a permutation of the {rel.arity} positions")
    return relation_project(rel, perm)


# -- builtin binary relations --------------------------------------------------

def orbital_type(label: Label) -> QfType:
    return QfType._trusted(2, (Label(label),))


BUILTIN_LABELS = {
    "E": (E,),
    "N": (N,),
    "=": (EQ,),
    "NEQ": (E, N),
    "uuE": (E, EQ),
    "uuN": (N, EQ),
}


def builtin_relations() -> Dict[str, OrbitRelation]:
    return {
        name: OrbitRelation(2, frozenset(orbital_type(lab) for lab in labels))
        for name, labels in BUILTIN_LABELS.items()
    }


# -- enumeration ---------------------------------------------------------------

def _iter_types(family: GraphFamily, r: int) -> Iterator[QfType]:
    """Depth-first over positions; each new class is checked against the bounds
    as soon as its labels to earlier classes are fixed."""
    rgs: List[int] = []
    reps: List[int] = []
    adjacency: List[List[bool]] = []  # over classes

    def labels_now() -> Tuple[Label, ...]:
        out = []
        for i, j in _pairs(r):
            a, b = rgs[i], rgs[j]
            out.append(EQ if a == b else (E if adjacency[a][b] else N))
        return tuple(out)

    def rec(p: int):
        if p == r:
            yield QfType._trusted(r, labels_now())
            return
        for c in range(len(reps)):
            rgs.append(c)
            yield from rec(p + 1)
            rgs.pop()
        c = len(reps)
        for choice in itertools.product((True, False), repeat=c):
            for row, bit in zip(adjacency, choice):
                row.append(bit)
            adjacency.append(list(choice) + [False])
            if not creates_bound(family, adjacency, c):
                rgs.append(c)
                reps.append(p)
                yield from rec(p + 1)
                reps.pop()
                rgs.pop()
            adjacency.pop()
            for row in adjacency:
                row.pop()

    yield from rec(0)


@lru_cache(maxsize=None)
def type_table(family: GraphFamily, r: int) -> Tuple[QfType, ...]:
    """All realizable r-types in enumeration (``sort_key``) order."""
    return tuple(_iter_types(family, r))


def enumerate_types(family: GraphFamily, r: int, max_arity: int = DEFAULT_MAX_ARITY) -> OrbitRelation:
    """The full relation: every realizable r-type of ``family``."""
    if not isinstance(r, int) or r < 1:
        raise ValueError(f"arity must be >= 1, got {r!r}")
    if r > max_arity:
        raise ArityTooLarge(f"arity {r} exceeds the enumeration cap {max_arity}")
    return OrbitRelation(r, frozenset(type_table(family, r)))


# -- behaviors acting on orbits ------------------------------------------------

@lru_cache(maxsize=500_000)
def _apply_cached(behavior, family, arity, arg_labels):
    out = tuple(behavior(*column) for column in zip(*arg_labels))
    if arity > 1 and _rgs_from_labels(arity, out) is None:
        return None
    if not _realizable_cached(family, arity, out):
        return None
    return QfType._trusted(arity, out)


def apply_behavior(behavior, args: Sequence[QfType], family: GraphFamily) -> Optional[QfType]:
    """Pointwise action of a behavior on argument orbits.

    Returns None when the image labeling is not an orbit of ``family``
    (unrealizable quotient, or an inconsistent equality pattern, which only
    non-injective behaviors can produce).
    """
    if len(args) != behavior.arity:
        raise ArityMismatch(f"behavior takes {behavior.arity} arguments, got {len(args)}")
    arity = args[0].arity
    if any(a.arity != arity for a in args):
        raise ArityMismatch("behavior arguments must share an arity")
    return _apply_cached(behavior, family, arity, tuple(a.labels for a in args))
