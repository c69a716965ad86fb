"""Constraint-based assembly of blueprints into molecules."""

from .candidates import Candidates, EdgeMergeCandidate, MergeCandidate, enumerate_candidates
from .decode import (
    Assembly,
    SoundnessReport,
    SoundnessViolation,
    assembly_from_model,
    decode_graph,
    verify_soundness,
)
from .encode import (
    Realization,
    ScaffoldNotRealizable,
    build_problem,
    encode_connectivity,
    encode_hard,
    encode_user,
    force_merges,
    identify_var,
)
from .problem import AssemblyProblem, SolverResult, Weights
from .solver import Budget, brute_force, solve

__all__ = [
    "Assembly",
    "AssemblyProblem",
    "Budget",
    "Candidates",
    "EdgeMergeCandidate",
    "MergeCandidate",
    "Realization",
    "ScaffoldNotRealizable",
    "SolverResult",
    "SoundnessReport",
    "SoundnessViolation",
    "Weights",
    "assembly_from_model",
    "brute_force",
    "build_problem",
    "decode_graph",
    "encode_connectivity",
    "encode_hard",
    "encode_user",
    "enumerate_candidates",
    "force_merges",
    "identify_var",
    "solve",
    "verify_soundness",
]
