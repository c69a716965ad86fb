"""Weisfeiler-Lehman hashing and canonical keys.

``canonical_key`` refines colours to a stable partition and then runs an
individualisation-refinement search for the lexicographically smallest
serialisation.  If the search exceeds ``MAX_LEAVES`` leaves (highly symmetric
inputs) the stable colour-refinement serialisation is hashed instead; that
fallback is a heuristic canonical form and may collide on WL-equivalent,
non-isomorphic graphs.
"""

from __future__ import annotations

import hashlib
from typing import Hashable, Sequence

from .graph import MolGraph

CanonicalKey = str

EMPTY_KEY: CanonicalKey = hashlib.blake2b(b"<empty-graph>", digest_size=16).hexdigest()
MAX_LEAVES = 4096


def _digest(obj) -> CanonicalKey:
    return hashlib.blake2b(repr(obj).encode(), digest_size=16).hexdigest()


def wl_hash(
    g: MolGraph,
    rounds: int = 3,
    atom_labels: Sequence[Hashable] | None = None,
) -> CanonicalKey:
    """Hash of the multiset of WL labels after ``rounds`` refinements.

    Round 0 labels are element symbols (plus ``atom_labels`` when given);
    each round hashes the atom's label with the sorted multiset of
    ``(bond order, neighbour label)`` pairs.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if g.n_atoms == 0:
        return EMPTY_KEY
    labels = [
        _digest((el, atom_labels[i] if atom_labels is not None else None))
        for i, el in enumerate(g.elements)
    ]
    for _ in range(rounds):
        labels = [
            _digest((labels[v], tuple(sorted((o, labels[u]) for u, o in g.neighbors(v)))))
            for v in range(g.n_atoms)
        ]
    return _digest(("wl", rounds, tuple(sorted(labels))))


def _refine(g: MolGraph, colors: list[int]) -> list[int]:
    """Colour refinement to the coarsest equitable partition.

    New colours are ranks of sorted signatures, so they depend only on the
    graph structure and the input colouring, never on atom indices.
    """
    ncls = len(set(colors))
    while True:
        sigs = [
            (colors[v], tuple(sorted((o, colors[u]) for u, o in g.neighbors(v))))
            for v in range(g.n_atoms)
        ]
        rank = {s: k for k, s in enumerate(sorted(set(sigs)))}
        new = [rank[s] for s in sigs]
        if len(rank) == ncls:
            return new
        colors, ncls = new, len(rank)


def _initial_colors(g: MolGraph, atom_labels: Sequence[Hashable] | None) -> list[int]:
    base = [
        (el, repr(atom_labels[i]) if atom_labels is not None else "")
        for i, el in enumerate(g.elements)
    ]
    rank = {b: k for k, b in enumerate(sorted(set(base)))}
    return [rank[b] for b in base]


def _serialize(g: MolGraph, colors: list[int], atom_labels) -> tuple:
    # colors is discrete here: colors[v] is v's canonical position
    n = g.n_atoms
    order = sorted(range(n), key=colors.__getitem__)
    labels = tuple(
        (g.elements[v], repr(atom_labels[v]) if atom_labels is not None else "") for v in order
    )
    edges = tuple(sorted((min(colors[i], colors[j]), max(colors[i], colors[j]), o) for i, j, o in g.bonds))
    return (labels, edges)


class _TooManyLeaves(Exception):
    pass


def canonical_order(g: MolGraph, atom_labels: Sequence[Hashable] | None = None) -> list[int] | None:
    """Canonical position for every atom, or None if the search was capped."""
    if g.n_atoms == 0:
        return []
    best: list = [None, None]
    leaves = [0]

    def search(colors: list[int]):
        colors = _refine(g, colors)
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = next((c for c in sorted(counts) if counts[c] > 1), None)
        if target is None:
            leaves[0] += 1
            if leaves[0] > MAX_LEAVES:
                raise _TooManyLeaves
            ser = _serialize(g, colors, atom_labels)
            if best[0] is None or ser < best[0]:
                best[0], best[1] = ser, colors
            return
        for v in range(g.n_atoms):
            if colors[v] == target:
                split = [2 * c + (0 if (u == v or c != target) else 1) for u, c in enumerate(colors)]
                search(split)

    try:
        search(_initial_colors(g, atom_labels))
    except _TooManyLeaves:
        return None
    return best[1]


def canonical_key(g: MolGraph, atom_labels: Sequence[Hashable] | None = None) -> CanonicalKey:
    """Key equal for isomorphic (optionally atom-labelled) graphs."""
    if g.n_atoms == 0:
        return EMPTY_KEY
    order = canonical_order(g, atom_labels)
    if order is not None:
        return _digest(("canon", _serialize(g, order, atom_labels)))
    colors = _refine(g, _initial_colors(g, atom_labels))
    sig = sorted(
        (colors[v], g.elements[v], tuple(sorted((o, colors[u]) for u, o in g.neighbors(v))))
        for v in range(g.n_atoms)
    )
    return _digest(("wl-stable", tuple(sig)))
