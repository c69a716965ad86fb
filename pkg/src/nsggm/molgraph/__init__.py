"""Molecular graphs: representation, SMILES I/O, valence, hashing, matching."""

from .elements import Element, cap, element_table, get_element, load_element_table
from .graph import AtomReport, MolGraph, ValenceReport, validate_valence
from .hashing import EMPTY_KEY, CanonicalKey, canonical_key, wl_hash
from .match import EmptyQuery, find_isomorphism, find_substructure, is_isomorphic, iter_embeddings
from .smiles import (
    EmptyInput,
    RingBondUnclosed,
    SmilesError,
    UnknownElement,
    ValenceExceeded,
    parse_smiles,
    read_corpus,
    write_smiles,
)

__all__ = [
    "AtomReport",
    "CanonicalKey",
    "EMPTY_KEY",
    "Element",
    "EmptyInput",
    "EmptyQuery",
    "MolGraph",
    "RingBondUnclosed",
    "SmilesError",
    "UnknownElement",
    "ValenceExceeded",
    "ValenceReport",
    "cap",
    "canonical_key",
    "element_table",
    "find_isomorphism",
    "find_substructure",
    "get_element",
    "is_isomorphic",
    "iter_embeddings",
    "load_element_table",
    "parse_smiles",
    "read_corpus",
    "validate_valence",
    "wl_hash",
    "write_smiles",
]
