"""Candidate merges between interface slots of different tokens."""

from __future__ import annotations

from dataclasses import dataclass

from ..decompose import Blueprint, Token
from ..molgraph import get_element

BOND_ORDERS = (1, 2, 3)


@dataclass(frozen=True)
class MergeCandidate:
    """Slot pair ``(ti, a) ~ (tj, b)``; ``new_bond_order`` set for bond creation."""

    ti: int
    a: int
    tj: int
    b: int
    new_bond_order: int | None = None


@dataclass(frozen=True)
class EdgeMergeCandidate:
    ti: int
    edge_a: tuple[int, int]
    tj: int
    edge_b: tuple[int, int]
    orientation: str  # "parallel" | "swapped"
    order: int

    @property
    def endpoint_pairs(self) -> tuple[tuple[int, int], tuple[int, int]]:
        (a1, a2), (b1, b2) = self.edge_a, self.edge_b
        if self.orientation == "parallel":
            return (a1, b1), (a2, b2)
        return (a1, b2), (a2, b1)


@dataclass
class Candidates:
    node: list[MergeCandidate]  # identifications legal on their own
    bond: list[MergeCandidate]  # new inter-token bonds
    edge: list[EdgeMergeCandidate]
    endpoint: list[MergeCandidate]  # identifications legal only as part of an edge merge


def _anchors(tok: Token) -> dict[int, int]:
    """Anchor atom -> internal bond-order sum."""
    return {s.local_atom: tok.internal_degree(s.local_atom) for s in tok.slots if s.anchor}


def node_merge_legal(ti: Token, a: int, tj: Token, b: int) -> bool:
    ea, eb = ti.graph.elements[a], tj.graph.elements[b]
    return ea == eb and ti.internal_degree(a) + tj.internal_degree(b) <= get_element(ea).cap


def enumerate_candidates(bp: Blueprint) -> Candidates:
    tokens = bp.tokens
    anchors = [_anchors(t) for t in tokens]
    node, bond, edge, endpoint = [], [], [], []
    node_set = set()
    for i in range(len(tokens)):
        for j in range(i + 1, len(tokens)):
            ti, tj = tokens[i], tokens[j]
            for a in sorted(anchors[i]):
                for b in sorted(anchors[j]):
                    if node_merge_legal(ti, a, tj, b):
                        node.append(MergeCandidate(i, a, j, b))
                        node_set.add((i, a, j, b))
                    cap_a = get_element(ti.graph.elements[a]).cap - anchors[i][a]
                    cap_b = get_element(tj.graph.elements[b]).cap - anchors[j][b]
                    for o in BOND_ORDERS:
                        if o <= min(cap_a, cap_b):
                            bond.append(MergeCandidate(i, a, j, b, o))
            seen_endpoints = set()
            for (a1, a2), oa in ti.edge_slot_orders:
                if a1 not in anchors[i] or a2 not in anchors[i]:
                    continue
                for (b1, b2), ob in tj.edge_slot_orders:
                    if ob != oa or b1 not in anchors[j] or b2 not in anchors[j]:
                        continue
                    for orient, pairs in (("parallel", ((a1, b1), (a2, b2))), ("swapped", ((a1, b2), (a2, b1)))):
                        if all(_edge_endpoint_ok(ti, u, tj, v, oa) for u, v in pairs):
                            edge.append(EdgeMergeCandidate(i, (a1, a2), j, (b1, b2), orient, oa))
                            for u, v in pairs:
                                key = (i, u, j, v)
                                if key not in node_set and key not in seen_endpoints:
                                    seen_endpoints.add(key)
                                    endpoint.append(MergeCandidate(i, u, j, v))
    return Candidates(node, bond, edge, sorted(endpoint, key=lambda m: (m.ti, m.a, m.tj, m.b)))


def _edge_endpoint_ok(ti: Token, u: int, tj: Token, v: int, order: int) -> bool:
    eu, ev = ti.graph.elements[u], tj.graph.elements[v]
    return eu == ev and ti.internal_degree(u) + tj.internal_degree(v) - order <= get_element(eu).cap
