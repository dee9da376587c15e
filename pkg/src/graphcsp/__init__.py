"""Constraint satisfaction over first-order expansions of homogeneous graphs."""

from .graphs import OMEGA, FiniteGraph, GraphFamily, bounds_of, embeds, l_value, realizable
from .orbits import EQ, E, N, Label, OrbitRelation, QfType, enumerate_types, parse_orbit, project
from .instance import Instance, make_instance, parse, serialize
from .minimality import establish_minimality, is_simple, is_trivial, quotient_and_check, verify_minimality
from .solver import decide_width, oracle, shrink_to_simple, solve_search
from .verdict import Verdict

__version__ = "0.1.0"
