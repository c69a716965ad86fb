"""Encoding of a blueprint into an :class:`AssemblyProblem`."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..decompose import Blueprint
from ..molgraph import get_element
from .candidates import Candidates, enumerate_candidates
from .problem import AssemblyProblem, BondMerge, EdgeMerge, IdentifyMerge, Weights

Slot = tuple[int, int]


class ScaffoldNotRealizable(ValueError):
    pass


@dataclass(frozen=True)
class Realization:
    """Tokens ``tokens`` of the blueprint reassemble a scaffold via ``merges``."""

    name: str
    tokens: tuple[int, ...]
    merges: tuple[tuple[int, int, int, int], ...]


def encode_hard(problem: AssemblyProblem, cands: Candidates | None = None) -> AssemblyProblem:
    """Merge variables plus structural constraints (integrity, element, valence, edge sharing)."""
    bp = problem.blueprint
    tokens = bp.tokens
    cands = cands if cands is not None else enumerate_candidates(bp)
    ident: dict[tuple[Slot, Slot], int] = {}
    nbr: dict[Slot, list[tuple[Slot, int]]] = {}

    for c in cands.node + cands.endpoint:
        m = IdentifyMerge(0, c.ti, c.a, c.tj, c.b)
        v = problem.new_var(m.name, decision=True)
        problem.identify.append(IdentifyMerge(v, c.ti, c.a, c.tj, c.b))
        u, w = (c.ti, c.a), (c.tj, c.b)
        ident[(u, w)] = ident[(w, u)] = v
        nbr.setdefault(u, []).append((w, v))
        nbr.setdefault(w, []).append((u, v))

    bonds_at: dict[Slot, list[tuple[int, int]]] = {}
    by_pair: dict[tuple[Slot, Slot], list[int]] = {}
    for c in cands.bond:
        m = BondMerge(0, c.ti, c.a, c.tj, c.b, c.new_bond_order)
        v = problem.new_var(m.name, decision=True)
        problem.bonds.append(BondMerge(v, c.ti, c.a, c.tj, c.b, c.new_bond_order))
        for s in ((c.ti, c.a), (c.tj, c.b)):
            bonds_at.setdefault(s, []).append((c.new_bond_order, v))
        by_pair.setdefault(((c.ti, c.a), (c.tj, c.b)), []).append(v)

    # edge merges are gates over their endpoint identifications
    edge_vars: dict[tuple, list[int]] = {}
    lower_copies: dict[tuple[int, tuple[int, int]], list[int]] = {}
    valid_edge_pairs = set()
    for c in cands.edge:
        (u1, v1), (u2, v2) = c.endpoint_pairs
        x1 = ident[((c.ti, u1), (c.tj, v1))]
        x2 = ident[((c.ti, u2), (c.tj, v2))]
        name = EdgeMerge(0, c.ti, c.edge_a, c.tj, c.edge_b, c.orientation, (x1, x2)).name
        y = problem.gate(name, "and", (x1, x2))
        problem.edges.append(EdgeMerge(y, c.ti, c.edge_a, c.tj, c.edge_b, c.orientation, (x1, x2)))
        edge_vars.setdefault((c.ti, c.edge_a, c.tj, c.edge_b), []).append(y)
        lower_copies.setdefault((c.tj, c.edge_b), []).append(y)
        valid_edge_pairs.add((c.ti, c.edge_a, c.tj, c.edge_b, c.orientation))

    # orientation exclusivity
    for ys in edge_vars.values():
        for k in range(len(ys)):
            for l in range(k + 1, len(ys)):
                problem.add_clause((-ys[k], -ys[l]))

    # two bonds whose endpoints are identified must be a legal edge merge
    for i in range(len(tokens)):
        for j in range(i + 1, len(tokens)):
            for a1, a2, _ in tokens[i].graph.bonds:
                for b1, b2, _ in tokens[j].graph.bonds:
                    for orient, p1, p2 in (("parallel", (a1, b1), (a2, b2)), ("swapped", (a1, b2), (a2, b1))):
                        x1 = ident.get(((i, p1[0]), (j, p1[1])))
                        x2 = ident.get(((i, p2[0]), (j, p2[1])))
                        if x1 and x2 and (i, (a1, a2), j, (b1, b2), orient) not in valid_edge_pairs:
                            problem.add_clause((-x1, -x2))

    # integrity and transitivity of identification
    for b, links in nbr.items():
        for k in range(len(links)):
            a, x_ab = links[k]
            for l in range(k + 1, len(links)):
                c, x_bc = links[l]
                if a[0] == c[0]:
                    problem.add_clause((-x_ab, -x_bc))
                    continue
                x_ac = ident.get((a, c))
                if x_ac is None:
                    problem.add_clause((-x_ab, -x_bc))
                else:
                    problem.add_clause((-x_ab, -x_bc, x_ac))

    # new bonds: one order per slot pair, per-slot capacity, no identification of bonded slots
    for vs in by_pair.values():
        for k in range(len(vs)):
            for l in range(k + 1, len(vs)):
                problem.add_clause((-vs[k], -vs[l]))
    for s, items in sorted(bonds_at.items()):
        tok = tokens[s[0]]
        residual = get_element(tok.graph.elements[s[1]]).cap - tok.internal_degree(s[1])
        problem.add_pb(items, residual)
        if s in nbr:
            ib = problem.gate(f"bonded_{s[0]}_{s[1]}", "or", [v for _, v in items])
            ii = problem.gate(f"identified_{s[0]}_{s[1]}", "or", [v for _, v in nbr[s]])
            problem.add_clause((-ib, -ii))

    # duplicate-copy markers: an edge copy is a duplicate if it is merged into a lower token
    dup: dict[tuple[int, tuple[int, int]], int] = {}
    for (t, e), ys in sorted(lower_copies.items()):
        dup[(t, e)] = ys[0] if len(ys) == 1 else problem.gate(f"dup_{t}_{e[0]}_{e[1]}", "or", ys)

    def dup_edges_at(s: Slot):
        t, a = s
        for (tt, e), d in dup.items():
            if tt == t and a in e:
                yield tokens[t].graph.bond_order(*e), d

    # exact valence of each merged class, written from every member's view
    for s in sorted(nbr):
        t, a = s
        tok = tokens[t]
        cap = get_element(tok.graph.elements[a]).cap
        terms: list[tuple[int, int]] = []
        for o, d in dup_edges_at(s):
            terms.append((-o, d))
        for m, x in nbr[s]:
            terms.append((tokens[m[0]].internal_degree(m[1]), x))
            for o, d in dup_edges_at(m):
                both = problem.gate(f"dupvia_{t}_{a}_{m[0]}_{m[1]}_{d}", "and", (x, d))
                terms.append((-o, both))
        problem.add_pb(terms, cap - tok.internal_degree(a))
    problem._ident = ident
    return problem


def encode_connectivity(problem: AssemblyProblem, parents: Iterable[int | None] | None = None) -> AssemblyProblem:
    """Root selection, reachability and the soft connectivity rewards."""
    bp = problem.blueprint
    n = len(bp.tokens)
    w = problem.weights
    links: dict[tuple[int, int], list[int]] = {}
    for m in problem.identify:
        links.setdefault((m.ti, m.tj), []).append(m.var)
    for m in problem.bonds:
        links.setdefault((m.ti, m.tj), []).append(m.var)
    for (i, j), vs in sorted(links.items()):
        problem.conn[(i, j)] = problem.gate(f"conn_{i}_{j}", "or", vs)
    problem.active = []
    for i in range(n):
        touching = [v for (a, b), v in sorted(problem.conn.items()) if i in (a, b)]
        problem.active.append(problem.gate(f"active_{i}", "or", touching))
    problem.roots = [problem.new_var(f"isRoot_{i}", decision=True) for i in range(n)]
    problem.add_clause(problem.roots)
    for i in range(n):
        for j in range(i + 1, n):
            problem.add_clause((-problem.roots[i], -problem.roots[j]))
    any_active = problem.gate("any_active", "or", problem.active)
    for i in range(n):
        problem.add_clause((-problem.roots[i], -any_active, problem.active[i]))
    problem.reach = [problem.gate(f"reach_{i}", "or", (problem.active[i], problem.roots[i])) for i in range(n)]
    for r in problem.reach:
        problem.add_soft(w.reach, r)
    for v in problem.conn.values():
        problem.add_soft(w.conn, v)
    if parents is not None:
        for child, par in enumerate(parents):
            if par is None:
                continue
            key = (min(child, par), max(child, par))
            if key in problem.conn:
                problem.add_soft(w.parent, problem.conn[key])
    return problem


def identify_var(problem: AssemblyProblem, ti: int, a: int, tj: int, b: int) -> int | None:
    return problem._ident.get(((ti, a), (tj, b)))


def force_merges(problem: AssemblyProblem, merges: Iterable[tuple[int, int, int, int]]) -> None:
    for ti, a, tj, b in merges:
        v = identify_var(problem, ti, a, tj, b)
        if v is None:
            raise ScaffoldNotRealizable(f"no merge candidate for ({ti},{a})~({tj},{b})")
        problem.add_clause((v,))


def encode_user(
    problem: AssemblyProblem,
    realizations: Iterable[Realization] = (),
    forced: Iterable[str] = (),
) -> dict[str, list[int]]:
    """Realisation literals for injected scaffolds; names in ``forced`` are asserted.

    Merges among a scaffold's own tokens other than the reassembling ones are
    forbidden so the scaffold keeps its structure once realised.
    """
    lits: dict[str, list[int]] = {}
    forced = set(forced)
    for k, r in enumerate(realizations):
        needed = []
        for ti, a, tj, b in r.merges:
            v = identify_var(problem, ti, a, tj, b)
            if v is None:
                raise ScaffoldNotRealizable(f"scaffold {r.name}: merge ({ti},{a})~({tj},{b}) is not a candidate")
            needed.append(v)
        inside = set(r.tokens)
        keep = set(needed)
        for m in problem.identify + problem.bonds:
            if m.ti in inside and m.tj in inside and m.var not in keep:
                problem.add_clause((-m.var,))
        lit = problem.gate(f"prefix_{k}_{r.name}", "and", needed + [problem.reach[r.tokens[0]]])
        lits.setdefault(r.name, []).append(lit)
        problem.labels[f"prefix_{k}_{r.name}"] = lit
        problem.branch_first.append(lit)
        if r.name in forced:
            problem.add_clause((lit,))
    return lits


def build_problem(
    bp: Blueprint,
    weights: Weights | None = None,
    guided: bool = True,
    forced_merges: Iterable[tuple[int, int, int, int]] = (),
) -> AssemblyProblem:
    problem = AssemblyProblem(bp, weights)
    encode_hard(problem)
    encode_connectivity(problem, bp.parents if guided and bp.parents else None)
    force_merges(problem, forced_merges)
    return problem
