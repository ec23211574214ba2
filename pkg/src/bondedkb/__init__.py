"""Bonded Kauffman bracket skein modules: diagrams, moves, evaluation, ingestion."""

from __future__ import annotations

from .diagram import BondedDiagram, parse_diagram, serialize_diagram, validate, writhe
from .engine import (
    EvaluationOptions,
    EvaluationResult,
    classical_bracket,
    evaluate_framed,
    evaluate_topological,
    normalized_value,
    reduced_polynomial,
)
from .laurent import BivariateLaurent, Coefficient, IntLaurent, SkeinValue

__all__ = [
    "BondedDiagram",
    "parse_diagram",
    "serialize_diagram",
    "validate",
    "writhe",
    "EvaluationOptions",
    "EvaluationResult",
    "classical_bracket",
    "evaluate_framed",
    "evaluate_topological",
    "normalized_value",
    "reduced_polynomial",
    "BivariateLaurent",
    "Coefficient",
    "IntLaurent",
    "SkeinValue",
]
