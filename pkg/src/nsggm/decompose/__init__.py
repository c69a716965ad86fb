"""Cycle/tree decomposition of molecules into slotted primitives."""

from .blueprint import (
    Blueprint,
    InterfaceSlot,
    NegativeResidual,
    Primitive,
    Token,
    acyclic_edges,
    characterize_interfaces,
    corpus_support,
    decompose_corpus,
    extract_blueprint,
    make_token,
    motif_key,
    partition,
    read_blueprints,
    variant_key,
    witness_merges,
    write_blueprint,
)
from .cycles import Cycle, cycle_space_dimension, minimum_cycle_basis
from .trees import TreePiece, count_support, refine_acyclic

__all__ = [
    "Blueprint",
    "Cycle",
    "InterfaceSlot",
    "NegativeResidual",
    "Primitive",
    "Token",
    "TreePiece",
    "acyclic_edges",
    "characterize_interfaces",
    "corpus_support",
    "decompose_corpus",
    "count_support",
    "cycle_space_dimension",
    "extract_blueprint",
    "make_token",
    "minimum_cycle_basis",
    "motif_key",
    "partition",
    "read_blueprints",
    "refine_acyclic",
    "variant_key",
    "witness_merges",
    "write_blueprint",
]
