"""Minimum cycle basis via Horton candidates and GF(2) elimination."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..molgraph import MolGraph


@dataclass(frozen=True)
class Cycle:
    """A simple cycle: atoms in walk order and the indices of its bonds in ``g.bonds``."""

    atoms: tuple[int, ...]
    edges: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.edges)

    def atom_pairs(self) -> tuple[tuple[int, int], ...]:
        n = len(self.atoms)
        return tuple(
            (min(self.atoms[k], self.atoms[(k + 1) % n]), max(self.atoms[k], self.atoms[(k + 1) % n]))
            for k in range(n)
        )


def _bfs_tree(g: MolGraph, root: int) -> tuple[dict[int, int | None], dict[int, int]]:
    parent: dict[int, int | None] = {root: None}
    dist = {root: 0}
    q = deque([root])
    while q:
        v = q.popleft()
        for u, _ in g.neighbors(v):
            if u not in parent:
                parent[u] = v
                dist[u] = dist[v] + 1
                q.append(u)
    return parent, dist


def _path_to_root(parent, v) -> list[int]:
    path = [v]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path


def _walk(g: MolGraph, edge_ids: list[int]) -> tuple[int, ...]:
    adj: dict[int, list[int]] = {}
    for e in edge_ids:
        i, j, _ = g.bonds[e]
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    start = min(adj)
    walk = [start]
    prev, cur = None, start
    nxt = min(adj[start])
    while nxt != start:
        walk.append(nxt)
        prev, cur = cur, nxt
        nxt = next(u for u in sorted(adj[cur]) if u != prev)
    return tuple(walk)


def cycle_space_dimension(g: MolGraph) -> int:
    return g.n_bonds - g.n_atoms + len(g.components())


def horton_candidates(g: MolGraph) -> list[int]:
    """Horton cycles as edge bitmasks, deduplicated."""
    edge_index = {(i, j): k for k, (i, j, _) in enumerate(g.bonds)}

    def eid(a, b):
        return edge_index[(a, b) if a < b else (b, a)]

    found: set[int] = set()
    for v in range(g.n_atoms):
        parent, _ = _bfs_tree(g, v)
        for x, y, _ in g.bonds:
            if x not in parent or y not in parent:
                continue
            px = _path_to_root(parent, x)
            py = _path_to_root(parent, y)
            if set(px) & set(py) != {v}:
                continue
            if parent[x] == y or parent[y] == x:
                continue
            mask = 1 << eid(x, y)
            for path in (px, py):
                for a, b in zip(path, path[1:]):
                    mask |= 1 << eid(a, b)
            found.add(mask)
    return sorted(found, key=lambda m: (bin(m).count("1"), _bits(m)))


def _bits(mask: int) -> list[int]:
    out, k = [], 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def minimum_cycle_basis(g: MolGraph) -> list[Cycle]:
    """Greedy independent subset of Horton cycles, shortest first.

    Ties in length are broken by the sorted list of bond indices, so the
    result is deterministic for a given atom ordering.
    """
    target = cycle_space_dimension(g)
    if target == 0:
        return []
    pivots: dict[int, int] = {}  # leading bit -> reduced row
    basis: list[Cycle] = []
    for mask in horton_candidates(g):
        r = mask
        while r:
            top = r.bit_length() - 1
            if top in pivots:
                r ^= pivots[top]
            else:
                pivots[top] = r
                break
        if r:
            edges = _bits(mask)
            basis.append(Cycle(_walk(g, edges), tuple(edges)))
            if len(basis) == target:
                break
    return basis
