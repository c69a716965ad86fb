"""Backtracking subgraph monomorphism (VF2-style candidate pruning).

Hydrogens are ignored: queries and hosts are matched on heavy-atom
skeletons, element symbols and bond orders.
"""

from __future__ import annotations

from typing import Iterator

from .graph import MolGraph


class EmptyQuery(ValueError):
    pass


def _query_order(q: MolGraph) -> list[int]:
    # BFS from the most connected atom so each new atom (after the first in a
    # component) has an already-mapped neighbour.
    order: list[int] = []
    seen: set[int] = set()
    remaining = sorted(range(q.n_atoms), key=lambda v: (-q.degree(v), v))
    for s in remaining:
        if s in seen:
            continue
        seen.add(s)
        queue = [s]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u, _ in sorted(q.neighbors(v), key=lambda t: (-q.degree(t[0]), t[0])):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    return order


def iter_embeddings(host: MolGraph, query: MolGraph, induced: bool = False) -> Iterator[dict[int, int]]:
    """Yield injective maps query atom -> host atom preserving elements and bonds."""
    if query.n_atoms == 0:
        raise EmptyQuery("query has no atoms")
    if query.n_atoms > host.n_atoms or query.n_bonds > host.n_bonds:
        return
    order = _query_order(query)
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def candidates(qv: int):
        anchored = [(qu, o) for qu, o in query.neighbors(qv) if qu in mapping]
        if anchored:
            qu, _ = anchored[0]
            pool = [h for h, _ in host.neighbors(mapping[qu])]
        else:
            pool = range(host.n_atoms)
        for hv in pool:
            if hv in used or host.elements[hv] != query.elements[qv]:
                continue
            if host.degree(hv) < query.degree(qv):
                continue
            ok = True
            for qu, o in query.neighbors(qv):
                if qu in mapping and host.bond_order(hv, mapping[qu]) != o:
                    ok = False
                    break
            if ok and induced:
                for qu, hu in mapping.items():
                    if query.bond_order(qv, qu) is None and host.bond_order(hv, hu) is not None:
                        ok = False
                        break
            if ok:
                yield hv

    def extend(k: int):
        if k == len(order):
            yield dict(mapping)
            return
        qv = order[k]
        for hv in candidates(qv):
            mapping[qv] = hv
            used.add(hv)
            yield from extend(k + 1)
            del mapping[qv]
            used.discard(hv)

    yield from extend(0)


def find_substructure(host: MolGraph, query: MolGraph) -> tuple[bool, dict[int, int] | None]:
    for emb in iter_embeddings(host, query):
        return True, emb
    return False, None


def has_substructure(host: MolGraph, query: MolGraph) -> bool:
    return find_substructure(host, query)[0]


def find_isomorphism(a: MolGraph, b: MolGraph) -> dict[int, int] | None:
    """Atom map a -> b if the graphs are isomorphic, else None."""
    if a.n_atoms != b.n_atoms or a.n_bonds != b.n_bonds:
        return None
    if sorted(a.elements) != sorted(b.elements):
        return None
    if a.n_atoms == 0:
        return {}
    for emb in iter_embeddings(b, a):
        return emb
    return None


def is_isomorphic(a: MolGraph, b: MolGraph) -> bool:
    return find_isomorphism(a, b) is not None
