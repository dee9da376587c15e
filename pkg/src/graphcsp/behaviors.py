"""Behavior tables of canonical binary and ternary operations.

A behavior says which orbital the image pair gets, given the orbitals of the
argument pairs.  Tables are stored as flat tuples indexed by label values
(``EQ=0, E=1, N=2``), so a binary table has 9 cells and a ternary one 27.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import IncoherentSpec
from .graphs import GraphFamily
from .orbits import EQ, E, N, Label, OrbitRelation, QfType, apply_behavior

BINARY_SHAPES = ("min", "max", "projection1", "projection2", "xor", "xnor", "e_constant", "n_constant")
FLAVORS = ("balanced", "e_dominated", "n_dominated")
TERNARY_SHAPES = ("majority", "minority", "h_c2omega")
CONSTANT_SHAPES = ("e_constant", "n_constant")

_SHAPE_ALIASES = {"projection(1)": "projection1", "projection(2)": "projection2"}


@dataclass(frozen=True)
class BinaryBehavior:
    name: str
    table: Tuple[Label, ...]
    arity = 2

    def __call__(self, a, b) -> Label:
        return self.table[3 * a + b]

    @property
    def injective(self) -> bool:
        return all((self(a, b) == EQ) == (a == EQ and b == EQ) for a in Label for b in Label)


@dataclass(frozen=True)
class TernaryBehavior:
    name: str
    table: Tuple[Label, ...]
    arity = 3

    def __call__(self, a, b, c) -> Label:
        return self.table[9 * a + 3 * b + c]

    @property
    def injective(self) -> bool:
        return all(
            (self(a, b, c) == EQ) == (a == b == c == EQ) for a in Label for b in Label for c in Label
        )


Behavior = (BinaryBehavior, TernaryBehavior)


def _distinct_rule(shape: str) -> Callable[[Label, Label], Label]:
    rules = {
        "min": lambda a, b: E if a == b == E else N,
        "max": lambda a, b: N if a == b == N else E,
        "projection1": lambda a, b: a,
        "projection2": lambda a, b: b,
        "xor": lambda a, b: E if a != b else N,
        "xnor": lambda a, b: E if a == b else N,
        "e_constant": lambda a, b: E,
        "n_constant": lambda a, b: N,
    }
    return rules[shape]


def make_binary(shape: str, flavor: Optional[str] = None) -> BinaryBehavior:
    """Binary injection behavior from a shape on distinct pairs and a flavor
    deciding the cells with exactly one ``=`` argument."""
    shape = _SHAPE_ALIASES.get(shape, shape)
    if shape not in BINARY_SHAPES:
        raise IncoherentSpec(f"unknown binary shape {shape!r}")
    if shape in CONSTANT_SHAPES:
        if flavor is not None:
            raise IncoherentSpec(f"{shape} takes no flavor, got {flavor!r}")
    elif flavor not in FLAVORS:
        raise IncoherentSpec(f"{shape} needs a flavor from {FLAVORS}, got {flavor!r}")
    rule = _distinct_rule(shape)
    table = []
    for a in Label:
        for b in Label:
            if a == EQ and b == EQ:
                table.append(EQ)
            elif a != EQ and b != EQ:
                table.append(rule(a, b))
            elif shape == "e_constant" or flavor == "e_dominated":
                table.append(E)
            elif shape == "n_constant" or flavor == "n_dominated":
                table.append(N)
            else:
                table.append(a if b == EQ else b)
    name = shape if flavor is None else f"{shape}:{flavor}"
    return BinaryBehavior(name, tuple(table))


def _majority(a, b, c) -> Label:
    return E if (a, b, c).count(E) >= 2 else N


def _minority(a, b, c) -> Label:
    return E if (a, b, c).count(N) % 2 == 0 else N


def make_ternary(shape: str, hyperplane: Optional[BinaryBehavior] = None) -> TernaryBehavior:
    """Ternary injection behavior.

    On all-distinct arguments ``majority`` / ``minority`` decide; when some
    argument is ``=`` the hyperplane table is applied to the two arguments
    left after dropping the last ``=`` position.  ``h_c2omega`` ignores the
    hyperplane: any N gives N, otherwise it is a minority over {E, =}.
    """
    if shape not in TERNARY_SHAPES:
        raise IncoherentSpec(f"unknown ternary shape {shape!r}")
    table = []
    if shape == "h_c2omega":
        if hyperplane is not None:
            raise IncoherentSpec("h_c2omega takes no hyperplane behavior")
        for a, b, c in itertools.product(Label, repeat=3):
            if N in (a, b, c):
                table.append(N)
            else:
                table.append(E if (a, b, c).count(E) % 2 == 1 else EQ)
        return TernaryBehavior("h_c2omega", tuple(table))
    if not isinstance(hyperplane, BinaryBehavior):
        raise IncoherentSpec(f"{shape} needs a binary hyperplane behavior")
    rule = _majority if shape == "majority" else _minority
    for args in itertools.product(Label, repeat=3):
        if EQ not in args:
            table.append(rule(*args))
        elif args == (EQ, EQ, EQ):
            table.append(EQ)
        else:
            drop = max(i for i, x in enumerate(args) if x == EQ)
            rest = [x for i, x in enumerate(args) if i != drop]
            table.append(hyperplane(*rest))
    return TernaryBehavior(f"{shape}:{hyperplane.name}", tuple(table))


def parse_behavior(text: str):
    """Parse specs like ``max:balanced``, ``e_constant``,
    ``majority:projection1:balanced`` or ``h_c2omega``."""
    parts = [p.strip() for p in text.strip().split(":")]
    head = parts[0]
    if head in TERNARY_SHAPES:
        if head == "h_c2omega":
            if len(parts) != 1:
                raise IncoherentSpec(f"h_c2omega takes no arguments: {text!r}")
            return make_ternary("h_c2omega")
        if len(parts) < 2:
            raise IncoherentSpec(f"{head} needs a hyperplane behavior: {text!r}")
        return make_ternary(head, parse_behavior(":".join(parts[1:])))
    if len(parts) == 1:
        return make_binary(head)
    if len(parts) == 2:
        return make_binary(head, parts[1])
    raise IncoherentSpec(f"cannot parse behavior spec {text!r}")


def all_binary_behaviors() -> List[BinaryBehavior]:
    out = []
    for shape in BINARY_SHAPES:
        if shape in CONSTANT_SHAPES:
            out.append(make_binary(shape))
        else:
            out.extend(make_binary(shape, fl) for fl in FLAVORS)
    return out


def all_ternary_behaviors(include_h: bool = True) -> List[TernaryBehavior]:
    out = [make_ternary(s, hb) for s in ("majority", "minority") for hb in all_binary_behaviors()]
    if include_h:
        out.append(make_ternary("h_c2omega"))
    return out


def format_table(b) -> str:
    """Binary: 3x3 grid, rows = first argument, columns = second.
    Ternary: one line per argument triple."""
    if isinstance(b, BinaryBehavior):
        lines = [f"{b.name}", "    " + " ".join(f"{l.symbol:>2}" for l in Label)]
        for a in Label:
            lines.append(f"{a.symbol:>2} |" + " ".join(f"{b(a, c).symbol:>2}" for c in Label))
        return "\n".join(lines)
    lines = [b.name]
    for args in itertools.product(Label, repeat=3):
        lines.append(" ".join(x.symbol for x in args) + " -> " + b(*args).symbol)
    return "\n".join(lines)


@dataclass(frozen=True)
class PreservationReport:
    status: str  # "preserved" | "violated" | "incompatible"
    arguments: Optional[Tuple[QfType, ...]] = None
    image: Optional[QfType] = None

    @property
    def preserved(self) -> bool:
        return self.status == "preserved"

    def __bool__(self):
        return self.preserved


def preserves(b, rel: OrbitRelation, family: GraphFamily) -> PreservationReport:
    """Check every argument tuple drawn from ``rel``; report the first failure."""
    members = rel.sorted()
    for args in itertools.product(members, repeat=b.arity):
        image = apply_behavior(b, args, family)
        if image is None:
            return PreservationReport("incompatible", tuple(args), None)
        if image not in rel.orbits:
            return PreservationReport("violated", tuple(args), image)
    return PreservationReport("preserved")


def closure(
    bs: Sequence,
    rel: OrbitRelation,
    family: GraphFamily,
    until: Optional[Callable[[QfType], bool]] = None,
) -> OrbitRelation:
    """Least superset of ``rel`` closed under the behaviors (unrealizable
    images are dropped).

    ``until`` is called on every orbit as it is added; when it returns True
    the computation stops and the partial closure is returned.
    """
    known: List[QfType] = rel.sorted()
    seen = set(known)
    old_end = 0
    while old_end < len(known):
        new_end = len(known)
        for b in bs:
            for p in range(b.arity):
                # the first argument taken from the latest batch sits at position p
                ranges = [range(0, old_end)] * p + [range(old_end, new_end)] + [range(0, new_end)] * (b.arity - p - 1)
                for idx in itertools.product(*ranges):
                    image = apply_behavior(b, [known[i] for i in idx], family)
                    if image is not None and image not in seen:
                        seen.add(image)
                        known.append(image)
                        if until is not None and until(image):
                            return OrbitRelation(rel.arity, frozenset(seen))
        old_end = new_end
    return OrbitRelation(rel.arity, frozenset(seen))


def table_string(b: BinaryBehavior) -> str:
    return " / ".join(" ".join(b(a, c).symbol for c in Label) for a in Label)
