"""Seeded random instance corpora.  The same seed always yields the same corpus."""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Sequence

from .graphs import OMEGA, GraphFamily
from .instance import Constraint, Instance
from .orbits import OrbitRelation, type_table

BUILTIN_NAMES = ("E", "N", "=", "NEQ", "uuE", "uuN")

CORPUS_FAMILIES = (
    GraphFamily.random(),
    GraphFamily.henson(3),
    GraphFamily.henson(4),
    GraphFamily.cliques(OMEGA, 2),
    GraphFamily.cliques(2, OMEGA),
    GraphFamily.cliques(OMEGA, OMEGA),
)


def random_relation(rng: random.Random, family: GraphFamily, arity: int, density: Optional[float] = None) -> OrbitRelation:
    table = type_table(family, arity)
    if density is None:
        density = rng.choice((0.1, 0.3, 0.5, 0.8))
    chosen = [t for t in table if rng.random() < density]
    if not chosen:
        chosen = [rng.choice(table)]
    return OrbitRelation(arity, frozenset(chosen))


def random_language(seed, family: GraphFamily, count: int = 5, arity: int = 4) -> Dict[str, OrbitRelation]:
    rng = random.Random(f"lang:{seed}:{family}")
    return {f"R{i + 1}": random_relation(rng, family, arity) for i in range(count)}


def random_instance(
    rng: random.Random,
    family: GraphFamily,
    relations: Dict[str, OrbitRelation],
    max_vars: int = 6,
    min_vars: int = 2,
    repeat_prob: float = 0.1,
) -> Instance:
    n = rng.randint(min_vars, max_vars)
    names = [f"v{i + 1}" for i in range(n)]
    pool = list(BUILTIN_NAMES) + sorted(relations)
    n_cons = rng.randint(1, n + 2)
    cons: List[Constraint] = []
    used = {}
    for _ in range(n_cons):
        rname = rng.choice(pool)
        arity = relations[rname].arity if rname in relations else 2
        if n >= arity and rng.random() >= repeat_prob:
            scope = rng.sample(names, arity)
        else:
            scope = [rng.choice(names) for _ in range(arity)]
        cons.append(Constraint(tuple(scope), rname))
        if rname in relations:
            used[rname] = relations[rname]
    return Instance(family, tuple(names), used, tuple(cons))


def corpus(seed, family: GraphFamily, size: int, max_vars: int = 6, builtins_only: bool = False,
           n_relations: int = 5) -> List[Instance]:
    """``size`` instances over ``family``; relations are the builtins plus
    ``n_relations`` random quaternary relations (none if ``builtins_only``)."""
    language = {} if builtins_only else random_language(seed, family, n_relations)
    rng = random.Random(f"corpus:{seed}:{family}:{builtins_only}")
    return [random_instance(rng, family, language, max_vars) for _ in range(size)]


def random_binary_instance(seed, family: GraphFamily, n: int, density: float = 0.1,
                           names: Sequence[str] = BUILTIN_NAMES) -> Instance:
    """``n`` variables, each pair constrained with probability ``density`` by a builtin."""
    rng = random.Random(f"binary:{seed}:{family}:{n}")
    variables = [f"v{i + 1}" for i in range(n)]
    cons = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                cons.append(Constraint((variables[i], variables[j]), rng.choice(list(names))))
    return Instance(family, tuple(variables), {}, tuple(cons))
