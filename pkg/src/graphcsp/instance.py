"""CSP instances over a homogeneous graph and their JSON document format.

Document layout::

    {
      "domain": {"family": "random"},
      "relations": {"R": {"arity": 4, "orbits": ["E,N,N,N,N,=", ...]}},
      "variables": ["v1", "v2", "v3"],
      "constraints": [{"scope": ["v1", "v2"], "relation": "E"}, ...]
    }

The binary relations ``E``, ``N``, ``=``, ``NEQ``, ``uuE`` and ``uuN`` are
always available and may not be redefined.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InvalidFamily, ParseError, SchemaError
from .graphs import GraphFamily
from .orbits import OrbitRelation, builtin_relations, parse_orbit, type_realizable

BUILTINS = builtin_relations()


@dataclass(frozen=True)
class Constraint:
    scope: Tuple[str, ...]
    relation: str

    def to_json(self) -> dict:
        return {"scope": list(self.scope), "relation": self.relation}


@dataclass(frozen=True)
class Instance:
    family: GraphFamily
    variables: Tuple[str, ...]
    relations: Dict[str, OrbitRelation] = field(default_factory=dict, hash=False, compare=True)
    constraints: Tuple[Constraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "relations", dict(self.relations))
        validate(self)

    def relation(self, name: str) -> OrbitRelation:
        if name in self.relations:
            return self.relations[name]
        if name in BUILTINS:
            return BUILTINS[name]
        raise SchemaError(f"unknown relation {name!r}")

    def index(self, var: str) -> int:
        return self.variables.index(var)

    @property
    def n(self) -> int:
        return len(self.variables)

    def constraint_relations(self) -> List[Tuple[Tuple[int, ...], OrbitRelation]]:
        """(scope as variable indices, relation) for every constraint."""
        pos = {v: i for i, v in enumerate(self.variables)}
        return [(tuple(pos[v] for v in c.scope), self.relation(c.relation)) for c in self.constraints]

    def with_constraints(self, extra: Sequence[Constraint], relations: Optional[Dict[str, OrbitRelation]] = None) -> "Instance":
        rels = dict(self.relations)
        rels.update(relations or {})
        return Instance(self.family, self.variables, rels, self.constraints + tuple(extra))

    def to_json(self) -> dict:
        return {
            "domain": self.family.to_json(),
            "relations": {
                name: {"arity": rel.arity, "orbits": rel.strings()} for name, rel in sorted(self.relations.items())
            },
            "variables": list(self.variables),
            "constraints": [c.to_json() for c in self.constraints],
        }


def validate(inst: Instance) -> None:
    if len(set(inst.variables)) != len(inst.variables):
        raise SchemaError("variable names must be unique", "variables")
    for name, rel in inst.relations.items():
        if name in BUILTINS:
            raise SchemaError(f"relation {name!r} shadows a builtin", f"relations.{name}")
        for k, t in enumerate(rel.sorted()):
            if not type_realizable(t, inst.family):
                raise SchemaError(f"orbit {t} is not realizable in {inst.family}", f"relations.{name}.orbits[{k}]")
    known = set(inst.variables)
    for k, c in enumerate(inst.constraints):
        loc = f"constraints[{k}]"
        if c.relation not in inst.relations and c.relation not in BUILTINS:
            raise SchemaError(f"unknown relation {c.relation!r}", loc)
        if not c.scope:
            raise SchemaError("empty scope", loc)
        for v in c.scope:
            if v not in known:
                raise SchemaError(f"unknown variable {v!r}", loc)
        arity = inst.relation(c.relation).arity
        if len(c.scope) != arity:
            raise SchemaError(f"scope has {len(c.scope)} variables, relation {c.relation!r} has arity {arity}", loc)


def _expect(cond, message, location):
    if not cond:
        raise SchemaError(message, location)


def from_json(doc) -> Instance:
    _expect(isinstance(doc, dict), "document must be an object", "$")
    for key in ("domain", "variables", "constraints"):
        _expect(key in doc, f"missing key {key!r}", "$")
    try:
        family = GraphFamily.from_json(doc["domain"])
    except InvalidFamily as exc:
        raise SchemaError(str(exc), "domain") from None

    relations = {}
    rel_block = doc.get("relations", {})
    _expect(isinstance(rel_block, dict), "relations must be an object", "relations")
    for name, body in rel_block.items():
        loc = f"relations.{name}"
        _expect(isinstance(body, dict), "relation must be an object", loc)
        arity = body.get("arity")
        _expect(isinstance(arity, int) and not isinstance(arity, bool) and arity >= 1, "arity must be a positive integer", loc)
        orbits = body.get("orbits", [])
        _expect(isinstance(orbits, list), "orbits must be a list", loc)
        types = []
        for k, text in enumerate(orbits):
            oloc = f"{loc}.orbits[{k}]"
            _expect(isinstance(text, str), "orbit must be a string", oloc)
            try:
                t = parse_orbit(text)
            except ParseError as exc:
                raise ParseError(str(exc), oloc) from None
            _expect(t.arity == arity, f"orbit has arity {t.arity}, relation declares {arity}", oloc)
            _expect(type_realizable(t, family), f"orbit {text!r} is not realizable in {family}", oloc)
            types.append(t)
        relations[name] = OrbitRelation(arity, frozenset(types))

    variables = doc["variables"]
    _expect(isinstance(variables, list) and all(isinstance(v, str) for v in variables),
            "variables must be a list of strings", "variables")
    constraints = []
    _expect(isinstance(doc["constraints"], list), "constraints must be a list", "constraints")
    for k, c in enumerate(doc["constraints"]):
        loc = f"constraints[{k}]"
        _expect(isinstance(c, dict) and "scope" in c and "relation" in c, "constraint needs 'scope' and 'relation'", loc)
        _expect(isinstance(c["scope"], list), "scope must be a list", loc)
        constraints.append(Constraint(tuple(c["scope"]), c["relation"]))
    return Instance(family, tuple(variables), relations, tuple(constraints))


def parse(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return from_json(doc)


def serialize(inst: Instance) -> str:
    return json.dumps(inst.to_json(), indent=2) + "\n"


def load(path) -> Instance:
    with open(path) as fh:
        return parse(fh.read())


def make_instance(family: GraphFamily, variables, constraints, relations=None) -> Instance:
    """Convenience builder: ``constraints`` is a list of (scope, relation-name)."""
    return Instance(
        family,
        tuple(variables),
        dict(relations or {}),
        tuple(Constraint(tuple(scope), name) for scope, name in constraints),
    )
