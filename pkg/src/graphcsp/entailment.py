"""Entailment of implications between binary atoms by quaternary relations.

A query ``S1(x1,x2) => S2(x3,x4)`` with optional side conditions is checked
against an explicit orbit set.  Positions in the API are 0-based, so the
implication reads pairs ``(0, 1)`` and ``(2, 3)``; display names use x1..x4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence, Tuple

from .errors import ArityMismatch
from .orbits import EQ, E, N, Label, OrbitRelation, QfType, permute

__all__ = [
    "OrbitalSet",
    "EntailmentQuery",
    "ClassReport",
    "Shape",
    "entails",
    "efficiently_entails",
    "classify",
    "shape_catalog",
    "dominating_shapes",
    "forbidden_shapes",
    "instantiates",
    "permute",
]

_NAMED = {
    "E": frozenset({E}),
    "N": frozenset({N}),
    "=": frozenset({EQ}),
    "uuE": frozenset({E, EQ}),
    "uuN": frozenset({N, EQ}),
    "NEQ": frozenset({E, N}),
    "ALL": frozenset({EQ, E, N}),
}


@dataclass(frozen=True)
class OrbitalSet:
    members: FrozenSet[Label]

    def __post_init__(self):
        members = frozenset(Label(x) for x in self.members)
        if not members:
            raise ValueError("orbital set must be non-empty")
        object.__setattr__(self, "members", members)

    @classmethod
    def named(cls, name: str) -> "OrbitalSet":
        if name == "EQ":
            name = "="
        try:
            return cls(_NAMED[name])
        except KeyError:
            raise ValueError(f"unknown orbital set {name!r}") from None

    def __contains__(self, label) -> bool:
        return label in self.members

    @property
    def name(self) -> str:
        for key, val in _NAMED.items():
            if val == self.members:
                return key
        return "{" + ",".join(sorted(l.symbol for l in self.members)) + "}"

    def __str__(self):
        return self.name


def _os(x) -> OrbitalSet:
    return x if isinstance(x, OrbitalSet) else OrbitalSet.named(x)


@dataclass(frozen=True)
class EntailmentQuery:
    """``s1`` on pair (0,1) implies ``s2`` on pair (2,3); side conditions are
    ``((i, j), set)`` constraints that every orbit must satisfy."""

    s1: OrbitalSet
    s2: OrbitalSet
    side_conditions: Tuple[Tuple[Tuple[int, int], OrbitalSet], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "s1", _os(self.s1))
        object.__setattr__(self, "s2", _os(self.s2))
        sides = []
        for (i, j), s in self.side_conditions:
            if not (0 <= i < 4 and 0 <= j < 4 and i != j):
                raise ValueError(f"side condition pair ({i}, {j}) outside positions 0..3")
            sides.append(((i, j), _os(s)))
        object.__setattr__(self, "side_conditions", tuple(sides))

    @property
    def name(self) -> str:
        text = f"{self.s1}->{self.s2}"
        if self.side_conditions:
            text += " | " + ", ".join(f"{s}(x{i + 1},x{j + 1})" for (i, j), s in self.side_conditions)
        return text

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ClassReport:
    query: EntailmentQuery
    entails: bool
    efficient: bool
    witness_forward: Optional[QfType] = None
    witness_backward: Optional[QfType] = None
    side_conditions_hold: bool = True

    def to_json(self) -> dict:
        return {
            "shape": self.query.name,
            "entails": self.entails,
            "efficient": self.efficient,
            "side_conditions_hold": self.side_conditions_hold,
            "witness_forward": None if self.witness_forward is None else str(self.witness_forward),
            "witness_backward": None if self.witness_backward is None else str(self.witness_backward),
        }


def _check_arity(rel: OrbitRelation):
    if rel.arity != 4:
        raise ArityMismatch(f"entailment queries need a quaternary relation, got arity {rel.arity}")


def _sides_hold(t: QfType, q: EntailmentQuery) -> bool:
    return all(t.label(i, j) in s for (i, j), s in q.side_conditions)


def entails(rel: OrbitRelation, q: EntailmentQuery) -> bool:
    _check_arity(rel)
    for t in rel.orbits:
        if t.label(0, 1) in q.s1 and t.label(2, 3) not in q.s2:
            return False
        if not _sides_hold(t, q):
            return False
    return True


def efficiently_entails(rel: OrbitRelation, q: EntailmentQuery) -> ClassReport:
    _check_arity(rel)
    ent = entails(rel, q)
    sides = all(_sides_hold(t, q) for t in rel.orbits)
    forward = backward = None
    for t in rel.sorted():
        a, b = t.label(0, 1), t.label(2, 3)
        if forward is None and a in q.s1 and b in q.s2:
            forward = t
        if backward is None and a not in q.s1 and b not in q.s2:
            backward = t
    efficient = ent and forward is not None and backward is not None
    return ClassReport(q, ent, efficient, forward, backward, sides)


def instantiates(rel: OrbitRelation, q: EntailmentQuery) -> bool:
    """Efficient entailment of the implication plus entailment of the sides."""
    return efficiently_entails(rel, q).efficient


@dataclass(frozen=True)
class Shape:
    name: str
    query: EntailmentQuery


def _shape(s1, s2, sides=()) -> Shape:
    q = EntailmentQuery(s1, s2, tuple(sides))
    return Shape(q.name, q)


_BRIDGE = (((0, 1), "uuE"), ((1, 2), "N"), ((2, 3), "uuE"))


def dominating_shapes(o1: Label) -> List[Shape]:
    """Shapes ruled out when ``o1`` is the dominant orbital and ``o2`` the other one."""
    o2 = N if o1 == E else E
    s1, s2 = o1.symbol, o2.symbol
    uu2 = "uu" + s2
    return [
        _shape(s1, uu2),
        _shape(s1, "="),
        _shape(s2, "=", [((0, 1), uu2), ((2, 3), uu2)]),
    ]


def shape_catalog() -> List[Shape]:
    shapes = dominating_shapes(E) + dominating_shapes(N)
    shapes += [
        _shape("N", "E", [((2, 3), "uuE")]),
        _shape("E", "=", _BRIDGE),
        _shape("=", "E", _BRIDGE),
        _shape("E", "E", _BRIDGE),
        _shape("=", "=", _BRIDGE),
    ]
    seen, out = set(), []
    for s in shapes:
        if s.name not in seen:
            seen.add(s.name)
            out.append(s)
    return out


def forbidden_shapes(behavior) -> List[Shape]:
    """Dominating-orbital shapes that a binary injection of the given kind
    rules out: max-like and E-constant use E, min-like and N-constant use N."""
    name = behavior.name
    if name in ("max:balanced", "max:e_dominated", "e_constant"):
        return dominating_shapes(E)
    if name in ("min:balanced", "min:n_dominated", "n_constant"):
        return dominating_shapes(N)
    return []


def classify(rel: OrbitRelation, catalog: Optional[Sequence[Shape]] = None) -> List[ClassReport]:
    """One report per catalog shape, in catalog order."""
    _check_arity(rel)
    if catalog is None:
        catalog = shape_catalog()
    return [efficiently_entails(rel, s.query) for s in catalog]
