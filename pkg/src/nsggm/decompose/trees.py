"""Refinement of the acyclic remainder into frequent tree motifs.

Every tree component of the acyclic remainder is a single block-cut tree
whose blocks are its bonds, so block-cut decomposition reduces to walking
bonds.  Connected sub-trees up to ``max_size`` atoms are enumerated and
canonicalised; patterns whose corpus support reaches ``tau`` become motif
tokens, chosen greedily (largest, then most supported) as bond-disjoint
pieces.  Bonds left uncovered are emitted as single-bond residual fragments.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from ..molgraph import CanonicalKey, MolGraph, canonical_key

Pair = tuple[int, int]

DEFAULT_TAU = 2
DEFAULT_MAX_SIZE = 4
DEFAULT_MAX_DEPTH = 4


@dataclass(frozen=True)
class TreePiece:
    atoms: tuple[int, ...]
    bonds: tuple[Pair, ...]
    key: CanonicalKey
    frequent: bool


def edge_components(edges: Iterable[Pair]) -> list[list[Pair]]:
    adj: dict[int, list[Pair]] = {}
    for e in edges:
        adj.setdefault(e[0], []).append(e)
        adj.setdefault(e[1], []).append(e)
    seen: set[Pair] = set()
    comps = []
    for e in sorted(set(edges)):
        if e in seen:
            continue
        comp, stack = [], [e]
        seen.add(e)
        while stack:
            cur = stack.pop()
            comp.append(cur)
            for v in cur:
                for f in adj[v]:
                    if f not in seen:
                        seen.add(f)
                        stack.append(f)
        comps.append(sorted(comp))
    return comps


def _atoms_of(edges: Iterable[Pair]) -> tuple[int, ...]:
    return tuple(sorted({v for e in edges for v in e}))


def _diameter(edges: frozenset[Pair]) -> int:
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    best = 0
    for s in adj:
        dist = {s: 0}
        stack = [s]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    stack.append(u)
        best = max(best, max(dist.values()))
    return best


def enumerate_subtrees(
    component: list[Pair], max_size: int = DEFAULT_MAX_SIZE, max_depth: int = DEFAULT_MAX_DEPTH
) -> list[frozenset[Pair]]:
    """All connected bond subsets of a tree component within the size/depth bounds."""
    adj: dict[int, list[Pair]] = {}
    for e in component:
        adj.setdefault(e[0], []).append(e)
        adj.setdefault(e[1], []).append(e)
    found: set[frozenset[Pair]] = set()
    frontier = [frozenset([e]) for e in component]
    found.update(frontier)
    while frontier:
        nxt = []
        for sub in frontier:
            atoms = {v for e in sub for v in e}
            if len(atoms) >= max_size:
                continue
            for v in atoms:
                for f in adj[v]:
                    if f in sub:
                        continue
                    grown = sub | {f}
                    if grown in found or _diameter(grown) > max_depth:
                        continue
                    found.add(grown)
                    nxt.append(grown)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def pattern_key(g: MolGraph, edges: Iterable[Pair]) -> CanonicalKey:
    edges = sorted(edges)
    local, _ = g.subgraph(_atoms_of(edges), edges)
    return canonical_key(local)


def component_patterns(
    g: MolGraph, component: list[Pair], max_size: int = DEFAULT_MAX_SIZE, max_depth: int = DEFAULT_MAX_DEPTH
) -> dict[frozenset[Pair], CanonicalKey]:
    return {s: pattern_key(g, s) for s in enumerate_subtrees(component, max_size, max_depth)}


def count_support(
    items: Iterable[tuple[MolGraph, Iterable[Pair]]],
    max_size: int = DEFAULT_MAX_SIZE,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> Counter:
    """Number of acyclic components (over all inputs) containing each pattern."""
    support: Counter = Counter()
    for g, acyclic in items:
        for comp in edge_components(acyclic):
            support.update(set(component_patterns(g, comp, max_size, max_depth).values()))
    return support


def refine_acyclic(
    g: MolGraph,
    acyclic_edges: Iterable[Pair],
    tau: int = DEFAULT_TAU,
    support: Counter | None = None,
    max_size: int = DEFAULT_MAX_SIZE,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> tuple[list[TreePiece], list[TreePiece]]:
    """Split acyclic components into frequent motifs and residual single bonds.

    ``support`` is a corpus-level table from :func:`count_support`; without
    it, support is counted over this molecule's own components.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    acyclic = sorted({(min(a, b), max(a, b)) for a, b in acyclic_edges})
    if support is None:
        support = count_support([(g, acyclic)], max_size, max_depth)
    motifs: list[TreePiece] = []
    residuals: list[TreePiece] = []
    for comp in edge_components(acyclic):
        pats = component_patterns(g, comp, max_size, max_depth)
        frequent = [(s, k) for s, k in pats.items() if support.get(k, 0) >= tau]
        frequent.sort(key=lambda sk: (-len(_atoms_of(sk[0])), -support[sk[1]], sk[1], sorted(sk[0])))
        covered: set[Pair] = set()
        for s, k in frequent:
            if s & covered:
                continue
            covered |= s
            motifs.append(TreePiece(_atoms_of(s), tuple(sorted(s)), k, True))
        for e in comp:
            if e not in covered:
                residuals.append(TreePiece(e, (e,), pattern_key(g, [e]), False))
    return motifs, residuals
