"""Primitives, interface slots and blueprints."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from ..molgraph import CanonicalKey, MolGraph, canonical_key, get_element, parse_smiles, write_smiles
from .cycles import minimum_cycle_basis
from .trees import DEFAULT_MAX_DEPTH, DEFAULT_MAX_SIZE, DEFAULT_TAU, count_support, edge_components, refine_acyclic

Pair = tuple[int, int]
BOND_ORDERS = (1, 2, 3)


class NegativeResidual(ValueError):
    pass


@dataclass(frozen=True)
class Primitive:
    kind: str  # "cycle" or "tree"
    graph: MolGraph
    global_map: tuple[int, ...] | None = None
    edge_slots: tuple[Pair, ...] = ()

    def global_edges(self) -> set[Pair]:
        if self.global_map is None:
            return set()
        m = self.global_map
        return {(min(m[i], m[j]), max(m[i], m[j])) for i, j, _ in self.graph.bonds}


@dataclass(frozen=True)
class InterfaceSlot:
    local_atom: int
    element: str
    valence: int
    residual: int
    residual_by_order: tuple[tuple[int, int], ...]
    anchor: bool = False


@dataclass(frozen=True)
class Token:
    motif_key: CanonicalKey
    variant_key: CanonicalKey
    primitive: Primitive
    slots: tuple[InterfaceSlot, ...]
    edge_slot_orders: tuple[tuple[Pair, int], ...] = ()

    @property
    def graph(self) -> MolGraph:
        return self.primitive.graph

    @property
    def kind(self) -> str:
        return self.primitive.kind

    def slot(self, atom: int) -> InterfaceSlot | None:
        for s in self.slots:
            if s.local_atom == atom:
                return s
        return None

    @property
    def anchors(self) -> tuple[InterfaceSlot, ...]:
        return tuple(s for s in self.slots if s.anchor)

    def internal_degree(self, atom: int) -> int:
        return self.graph.bond_sum(atom)


@dataclass(frozen=True)
class Blueprint:
    tokens: tuple[Token, ...]
    parents: tuple[int | None, ...] = ()
    merge_types: tuple[str | None, ...] = ()
    source: MolGraph | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def motif_keys(self) -> tuple[CanonicalKey, ...]:
        return tuple(t.motif_key for t in self.tokens)


def partition(g: MolGraph) -> tuple[list[Primitive], set[int], set[Pair]]:
    """Cycles of a minimum cycle basis plus the components of the acyclic remainder."""
    cycles = minimum_cycle_basis(g)
    cycle_edges: set[Pair] = set()
    prims: list[Primitive] = []
    for c in cycles:
        pairs = c.atom_pairs()
        cycle_edges.update(pairs)
        local, gmap = g.subgraph(c.atoms, pairs)
        prims.append(Primitive("cycle", local, gmap, tuple((a, b) for a, b, _ in local.bonds)))
    acyclic = [(i, j) for i, j, _ in g.bonds if (i, j) not in cycle_edges]
    for comp in edge_components(acyclic):
        atoms = sorted({v for e in comp for v in e})
        local, gmap = g.subgraph(atoms, comp)
        prims.append(Primitive("tree", local, gmap))
    covered = {v for p in prims for v in p.global_map}
    for v in range(g.n_atoms):
        if v not in covered:
            local, gmap = g.subgraph([v], [])
            prims.append(Primitive("tree", local, gmap))
    shared_nodes, shared_edges = _overlaps(prims)
    return prims, shared_nodes, shared_edges


def _overlaps(prims: list[Primitive]) -> tuple[set[int], set[Pair]]:
    node_count: Counter = Counter()
    edge_count: Counter = Counter()
    for p in prims:
        node_count.update(set(p.global_map))
        edge_count.update(p.global_edges())
    return {v for v, c in node_count.items() if c > 1}, {e for e, c in edge_count.items() if c > 1}


def characterize_interfaces(
    p: Primitive, host: MolGraph | None = None, anchors: Iterable[int] = ()
) -> tuple[tuple[InterfaceSlot, ...], tuple[tuple[Pair, int], ...]]:
    """Residual capacities for every atom of a primitive.

    ``anchors`` are local atom indices that overlap other primitives; they are
    always emitted as slots (even with zero residual) and flagged.
    """
    g = p.graph
    if host is not None and p.global_map is not None:
        for k, v in enumerate(p.global_map):
            if host.elements[v] != g.elements[k]:
                raise ValueError("primitive global map does not match host elements")
    anchors = set(anchors)
    slots = []
    for a, el in enumerate(g.elements):
        val = get_element(el).cap
        residual = val - g.bond_sum(a)
        if residual < 0:
            raise NegativeResidual(f"atom {a} ({el}) is over-saturated inside its primitive")
        if residual == 0 and a not in anchors:
            continue
        by_order = tuple((b, residual // b) for b in BOND_ORDERS if b <= residual)
        slots.append(InterfaceSlot(a, el, val, residual, by_order, a in anchors))
    edge_orders = tuple(((i, j), g.bond_order(i, j)) for i, j in p.edge_slots)
    return tuple(slots), edge_orders


def motif_key(p: Primitive) -> CanonicalKey:
    return canonical_key(p.graph)


def variant_key(p: Primitive, slots: Iterable[InterfaceSlot]) -> CanonicalKey:
    by_atom = {s.local_atom: s for s in slots}
    labels = [
        (by_atom[a].residual, by_atom[a].anchor) if a in by_atom else (0, False)
        for a in range(p.graph.n_atoms)
    ]
    return canonical_key(p.graph, labels)


def make_token(p: Primitive, anchors: Iterable[int] | None = None) -> Token:
    """Token for a primitive; ``anchors=None`` opens every unsaturated atom."""
    if anchors is None:
        g = p.graph
        anchors = [a for a in range(g.n_atoms) if get_element(g.elements[a]).cap > g.bond_sum(a)]
    slots, edge_orders = characterize_interfaces(p, anchors=anchors)
    return Token(motif_key(p), variant_key(p, slots), p, slots, edge_orders)


def extract_blueprint(
    g: MolGraph,
    support: Counter | None = None,
    tau: int = DEFAULT_TAU,
    max_size: int = DEFAULT_MAX_SIZE,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> Blueprint:
    """Decompose ``g`` into an ordered blueprint with ground-truth guidance.

    Tokens are listed in BFS order over primitive overlaps starting from the
    first primitive; the ground-truth parent of each token is its BFS parent
    and its merge type is ``"edge"`` iff the overlap with that parent
    includes a bond.
    """
    prims, _, _ = partition(g)
    cycles = [p for p in prims if p.kind == "cycle"]
    trees = [p for p in prims if p.kind == "tree"]
    acyclic = [e for p in trees for e in p.global_edges()]
    motifs, residuals = refine_acyclic(g, acyclic, tau, support, max_size, max_depth)
    pieces: list[Primitive] = list(cycles)
    for piece in sorted(motifs + residuals, key=lambda t: t.bonds):
        local, gmap = g.subgraph(piece.atoms, piece.bonds)
        pieces.append(Primitive("tree", local, gmap))
    pieces.extend(p for p in trees if p.graph.n_bonds == 0)

    shared_nodes, _ = _overlaps(pieces)
    order, parents, merges = _bfs_order(pieces)
    tokens = []
    for k in order:
        p = pieces[k]
        anchors = [a for a, v in enumerate(p.global_map) if v in shared_nodes]
        tokens.append(make_token(p, anchors))
    return Blueprint(tuple(tokens), tuple(parents), tuple(merges), g)


def _bfs_order(pieces: list[Primitive]):
    n = len(pieces)
    atom_sets = [set(p.global_map) for p in pieces]
    edge_sets = [p.global_edges() for p in pieces]
    order: list[int] = []
    parent_of: dict[int, int | None] = {}
    for s in range(n):
        if s in parent_of:
            continue
        parent_of[s] = None
        queue = [s]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for u in range(n):
                if u not in parent_of and atom_sets[u] & atom_sets[v]:
                    parent_of[u] = v
                    queue.append(u)
    pos = {v: k for k, v in enumerate(order)}
    parents: list[int | None] = []
    merges: list[str | None] = []
    for v in order:
        p = parent_of[v]
        if p is None:
            parents.append(None)
            merges.append(None)
        else:
            parents.append(pos[p])
            merges.append("edge" if edge_sets[v] & edge_sets[p] else "node")
    return order, parents, merges


def witness_merges(bp: Blueprint) -> list[tuple[int, int, int, int]]:
    """Identity merges that reassemble the source molecule.

    Every pair of local copies of the same host atom, as
    ``(token_i, atom_a, token_j, atom_b)`` with ``token_i < token_j``.
    """
    copies: dict[int, list[tuple[int, int]]] = {}
    for t, tok in enumerate(bp.tokens):
        if tok.primitive.global_map is None:
            raise ValueError("witness needs a blueprint extracted from a molecule")
        for a, v in enumerate(tok.primitive.global_map):
            copies.setdefault(v, []).append((t, a))
    out = []
    for v in sorted(copies):
        cs = copies[v]
        for x in range(len(cs)):
            for y in range(x + 1, len(cs)):
                (ti, a), (tj, b) = cs[x], cs[y]
                out.append((ti, a, tj, b))
    return sorted(out)


# -- serialisation ---------------------------------------------------------

SCHEMA = "nsggm-blueprint 1"


def write_blueprint(bp: Blueprint, name: str = "") -> str:
    lines = [SCHEMA]
    if name:
        lines.append(f"name {name}")
    if bp.source is not None:
        lines.append(f"source {write_smiles(bp.source)}")
    for t, tok in enumerate(bp.tokens):
        p = tok.primitive
        gmap = ",".join(map(str, p.global_map)) if p.global_map is not None else "-"
        lines.append(
            f"token {t} kind={p.kind} motif={tok.motif_key} variant={tok.variant_key} "
            f"atoms={','.join(p.graph.elements)} map={gmap}"
        )
        for i, j, o in p.graph.bonds:
            lines.append(f"bond {t} {i} {j} {o}")
        for s in tok.slots:
            lines.append(
                f"slot {t} {s.local_atom} {s.element} {s.valence} {s.residual} {int(s.anchor)}"
            )
        for (i, j), o in tok.edge_slot_orders:
            lines.append(f"edgeslot {t} {i} {j} {o}")
    for t in range(len(bp.tokens)):
        par = bp.parents[t] if bp.parents else None
        mt = bp.merge_types[t] if bp.merge_types else None
        lines.append(f"parent {t} {'-' if par is None else par} {mt or '-'}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def read_blueprints(text: str) -> list[tuple[str, Blueprint]]:
    """Parse one or more serialised blueprints."""
    out: list[tuple[str, Blueprint]] = []
    block: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line == SCHEMA:
            block = []
            continue
        if line == "end":
            out.append(_parse_block(block))
            block = []
            continue
        block.append(line)
    if block:
        raise ValueError("truncated blueprint file (missing 'end')")
    return out


def _parse_block(lines: list[str]) -> tuple[str, Blueprint]:
    name = ""
    source = None
    toks: dict[int, dict] = {}
    parents: dict[int, int | None] = {}
    merges: dict[int, str | None] = {}
    for line in lines:
        head, _, rest = line.partition(" ")
        f = rest.split()
        if head == "name":
            name = rest
        elif head == "source":
            source = parse_smiles(rest)
        elif head == "token":
            kv = dict(x.split("=", 1) for x in f[1:])
            toks[int(f[0])] = {
                "kind": kv["kind"],
                "motif": kv["motif"],
                "variant": kv["variant"],
                "atoms": kv["atoms"].split(","),
                "map": None if kv["map"] == "-" else tuple(int(x) for x in kv["map"].split(",")),
                "bonds": [],
                "slots": [],
                "edges": [],
            }
        elif head == "bond":
            toks[int(f[0])]["bonds"].append((int(f[1]), int(f[2]), int(f[3])))
        elif head == "slot":
            t, a, el, val, res, anc = f
            res_i = int(res)
            by = tuple((b, res_i // b) for b in BOND_ORDERS if b <= res_i)
            toks[int(t)]["slots"].append(InterfaceSlot(int(a), el, int(val), res_i, by, anc == "1"))
        elif head == "edgeslot":
            toks[int(f[0])]["edges"].append(((int(f[1]), int(f[2])), int(f[3])))
        elif head == "parent":
            parents[int(f[0])] = None if f[1] == "-" else int(f[1])
            merges[int(f[0])] = None if f[2] == "-" else f[2]
        else:
            raise ValueError(f"unknown blueprint record {head!r}")
    tokens = []
    for t in sorted(toks):
        d = toks[t]
        g = MolGraph.build(d["atoms"], d["bonds"])
        prim = Primitive(d["kind"], g, d["map"], tuple(e for e, _ in d["edges"]))
        tokens.append(Token(d["motif"], d["variant"], prim, tuple(d["slots"]), tuple(d["edges"])))
    n = len(tokens)
    return name, Blueprint(
        tuple(tokens),
        tuple(parents.get(t) for t in range(n)),
        tuple(merges.get(t) for t in range(n)),
        source,
    )


def acyclic_edges(g: MolGraph) -> list[Pair]:
    prims, _, _ = partition(g)
    return sorted(e for p in prims if p.kind == "tree" for e in p.global_edges())


def corpus_support(
    graphs: Iterable[MolGraph], max_size: int = DEFAULT_MAX_SIZE, max_depth: int = DEFAULT_MAX_DEPTH
) -> Counter:
    return count_support(((g, acyclic_edges(g)) for g in graphs), max_size, max_depth)


def decompose_corpus(
    graphs: list[MolGraph],
    tau: int = DEFAULT_TAU,
    max_size: int = DEFAULT_MAX_SIZE,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> tuple[list[Blueprint], Counter]:
    """Blueprints for every molecule using corpus-level tree-motif support."""
    support = corpus_support(graphs, max_size, max_depth)
    return [extract_blueprint(g, support, tau, max_size, max_depth) for g in graphs], support
