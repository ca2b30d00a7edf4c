"""Dynamical invariants of loxodromic automorphisms of affine surfaces."""

__version__ = "0.1.0"

from . import errors
from .maps import (
    HenonComposition,
    HenonFactor,
    MarkovWord,
    MonomialAuto,
    Point,
    compose,
    dynamical_degree,
    eval_auto,
    henon_map,
    inverse,
    is_loxodromic,
    iterate,
    markov_point,
    plane_point,
    torus_point,
)

__all__ = [
    "errors",
    "HenonComposition",
    "HenonFactor",
    "MarkovWord",
    "MonomialAuto",
    "Point",
    "compose",
    "dynamical_degree",
    "eval_auto",
    "henon_map",
    "inverse",
    "is_loxodromic",
    "iterate",
    "markov_point",
    "plane_point",
    "torus_point",
]
