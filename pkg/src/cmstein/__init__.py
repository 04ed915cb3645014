"""Configuration-model motif statistics with exact oracles and Stein bounds."""

from .combinatorics import DegreeSequence, Motif, MotifClass, build
from .matchings import Matching, MotifStatistics, census

__all__ = ["DegreeSequence", "Motif", "MotifClass", "Matching", "MotifStatistics", "build", "census"]
