"""Hecke graphs for PGL2 and GL2 over the projective line with ramified level structure."""
from __future__ import annotations

from .algebra import FiniteField, LocalRing, Point, field_of_order, make_field, parse_point, rational_point
from .graph import HeckeGraph, build_graph, check_covering, forget_map
from .moduli import BundleType, LevelSpace, Vertex
from .subgroups import RamificationDatum, RamPoint, SubgroupLabel

__all__ = [
    "BundleType", "FiniteField", "HeckeGraph", "LevelSpace", "LocalRing", "Point", "RamPoint",
    "RamificationDatum", "SubgroupLabel", "Vertex", "build_graph", "check_covering", "field_of_order",
    "forget_map", "make_field", "parse_point", "rational_point",
]
