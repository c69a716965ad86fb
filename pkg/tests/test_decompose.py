import itertools
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsggm.decompose import (
    NegativeResidual,
    Primitive,
    acyclic_edges,
    characterize_interfaces,
    count_support,
    cycle_space_dimension,
    decompose_corpus,
    extract_blueprint,
    minimum_cycle_basis,
    partition,
    read_blueprints,
    refine_acyclic,
    write_blueprint,
)
from nsggm.molgraph import MolGraph, parse_smiles

BENZENE = "C1=CC=CC=C1"
TOLUENE = "CC1=CC=CC=C1"
NAPHTHALENE = "C1=CC=C2C=CC=CC2=C1"


def _edge_ids(g):
    return {(min(i, j), max(i, j)): k for k, (i, j, _) in enumerate(g.bonds)}


def all_simple_cycles(g):
    """Every simple cycle as an edge bitmask, by DFS from its smallest atom."""
    eid = _edge_ids(g)
    adj = {v: [] for v in range(g.n_atoms)}
    for i, j, _ in g.bonds:
        adj[i].append(j)
        adj[j].append(i)
    found = set()

    def dfs(start, v, path, seen):
        for u in adj[v]:
            if u == start and len(path) >= 3:
                cyc = path + [start]
                found.add(sum(1 << eid[(min(a, b), max(a, b))] for a, b in zip(cyc, cyc[1:])))
            elif u > start and u not in seen:
                seen.add(u)
                dfs(start, u, path + [u], seen)
                seen.discard(u)

    for s in range(g.n_atoms):
        dfs(s, s, [s], {s})
    return found


def brute_minimum_basis_weight(g):
    """Greedy over all simple cycles by length with GF(2) independence: the matroid optimum."""
    rows: list[int] = []
    total = 0
    for mask in sorted(all_simple_cycles(g), key=lambda m: (bin(m).count("1"), m)):
        x = mask
        for r in rows:
            x = min(x, x ^ r)
        if x:
            rows.append(x)
            rows.sort(reverse=True)
            total += bin(mask).count("1")
    return len(rows), total


# -- cycle basis ---------------------------------------------------------------


def test_benzene_has_one_six_cycle():
    basis = minimum_cycle_basis(parse_smiles(BENZENE))
    assert [len(c) for c in basis] == [6]


def test_naphthalene_two_hexagons_share_one_edge():
    basis = minimum_cycle_basis(parse_smiles(NAPHTHALENE))
    assert [len(c) for c in basis] == [6, 6]
    shared = set(basis[0].atom_pairs()) & set(basis[1].atom_pairs())
    assert len(shared) == 1
    assert brute_minimum_basis_weight(parse_smiles(NAPHTHALENE)) == (2, 12)


def test_ethane_has_empty_basis():
    assert minimum_cycle_basis(parse_smiles("CC")) == []


def test_basis_is_minimum_on_corpus(corpus_graphs):
    for g in corpus_graphs:
        basis = minimum_cycle_basis(g)
        assert len(basis) == cycle_space_dimension(g) == g.n_bonds - g.n_atoms + len(g.components())
        assert (len(basis), sum(len(c) for c in basis)) == brute_minimum_basis_weight(g)


def test_cycles_are_closed_simple_walks(corpus_graphs):
    for g in corpus_graphs:
        for c in minimum_cycle_basis(g):
            assert len(set(c.atoms)) == len(c.atoms) == len(c.edges)
            for a, b in c.atom_pairs():
                assert g.bond_order(a, b)


# -- partition -----------------------------------------------------------------


def test_partition_benzene():
    prims, nodes, edges = partition(parse_smiles(BENZENE))
    assert [p.kind for p in prims] == ["cycle"] and not nodes and not edges


def test_partition_toluene():
    g = parse_smiles(TOLUENE)
    prims, nodes, edges = partition(g)
    assert sorted((p.kind, p.graph.n_atoms) for p in prims) == [("cycle", 6), ("tree", 2)]
    assert nodes == {1} and not edges


def test_partition_naphthalene():
    g = parse_smiles(NAPHTHALENE)
    prims, nodes, edges = partition(g)
    assert [p.kind for p in prims] == ["cycle", "cycle"]
    assert len(edges) == 1
    (a, b), = edges
    assert {a, b} <= nodes


def test_cover_property_and_primitive_shapes(corpus_graphs):
    for g in corpus_graphs:
        prims, _, _ = partition(g)
        assert set().union(*(set(p.global_map) for p in prims)) == set(range(g.n_atoms))
        assert set().union(*(p.global_edges() for p in prims)) == {(i, j) for i, j, _ in g.bonds}
        for p in prims:
            h = p.graph
            assert h.is_connected()
            if p.kind == "cycle":
                assert h.n_atoms == h.n_bonds and all(h.degree(v) == 2 for v in range(h.n_atoms))
            else:
                assert h.n_bonds == h.n_atoms - 1


# -- acyclic refinement --------------------------------------------------------


def test_repeated_chain_becomes_motif():
    mols = [parse_smiles("CCN"), parse_smiles("NCCO")]
    support = count_support([(g, acyclic_edges(g)) for g in mols])
    g = mols[0]
    motifs, residuals = refine_acyclic(g, acyclic_edges(g), tau=2, support=support)
    assert [m.bonds for m in motifs] == [((0, 1), (1, 2))] and residuals == []


def test_unsupported_components_fall_back_to_single_bonds():
    g = parse_smiles("CCOCN")
    motifs, residuals = refine_acyclic(g, acyclic_edges(g), tau=99)
    assert motifs == []
    assert sorted(r.bonds for r in residuals) == [((i, i + 1),) for i in range(4)]


def test_single_edge_is_one_residual():
    g = parse_smiles("CO")
    motifs, residuals = refine_acyclic(g, acyclic_edges(g), tau=2)
    assert motifs == [] and [r.bonds for r in residuals] == [((0, 1),)]


def test_tau_must_be_positive():
    with pytest.raises(ValueError):
        refine_acyclic(parse_smiles("CC"), [(0, 1)], tau=0)


# -- interfaces ----------------------------------------------------------------


def test_benzene_carbon_residual():
    g = parse_smiles(BENZENE)
    prims, _, _ = partition(g)
    slots, _ = characterize_interfaces(prims[0], g)
    assert len(slots) == 6
    assert all(s.residual == 1 and s.residual_by_order == ((1, 1),) for s in slots)


def test_saturated_atom_has_no_slot():
    # carbonyl O inside a C=O tree fragment: cap 2, internal 2
    p = Primitive("tree", parse_smiles("C=O"))
    slots, _ = characterize_interfaces(p)
    assert [s.local_atom for s in slots] == [0]


def test_fusion_bond_order_recorded():
    g = parse_smiles(NAPHTHALENE)
    prims, _, edges = partition(g)
    (u, v), = edges
    for p in prims:
        _, orders = characterize_interfaces(p, g)
        inv = {h: k for k, h in enumerate(p.global_map)}
        a, b = sorted((inv[u], inv[v]))
        assert dict(orders)[(a, b)] == g.bond_order(u, v)


def test_oversaturated_primitive_rejected():
    p = Primitive("tree", MolGraph(("O", "C", "C", "C"), ((0, 1, 1), (0, 2, 1), (0, 3, 1))))
    with pytest.raises(NegativeResidual):
        characterize_interfaces(p)


# -- blueprints ----------------------------------------------------------------


def test_blueprint_benzene():
    bp = extract_blueprint(parse_smiles(BENZENE))
    assert len(bp) == 1 and bp.parents == (None,)


def test_blueprint_toluene():
    bp = extract_blueprint(parse_smiles(TOLUENE))
    kinds = [t.kind for t in bp.tokens]
    assert sorted(kinds) == ["cycle", "tree"]
    tree = kinds.index("tree")
    assert bp.parents[tree] == kinds.index("cycle") and bp.merge_types[tree] == "node"


def test_blueprint_naphthalene():
    bp = extract_blueprint(parse_smiles(NAPHTHALENE))
    assert len(bp) == 2 and bp.parents == (None, 0) and bp.merge_types[1] == "edge"


def test_blueprints_are_deterministic_and_serialisable(corpus_graphs):
    first, s1 = decompose_corpus(corpus_graphs[:80])
    second, s2 = decompose_corpus(corpus_graphs[:80])
    assert first == second and s1 == s2
    text = "".join(write_blueprint(bp, f"m{k}") for k, bp in enumerate(first))
    back = read_blueprints(text)
    assert [n for n, _ in back] == [f"m{k}" for k in range(80)]
    assert [bp for _, bp in back] == first
    assert "".join(write_blueprint(bp, n) for n, bp in back) == text


def test_truncated_blueprint_file_rejected():
    text = write_blueprint(extract_blueprint(parse_smiles(TOLUENE)))
    with pytest.raises(ValueError):
        read_blueprints(text.replace("end\n", ""))


@settings(max_examples=40, deadline=None)
@given(idx=st.integers(0, 10_000))
def test_token_atoms_cover_molecule(corpus_graphs, idx):
    g = corpus_graphs[idx % len(corpus_graphs)]
    bp = extract_blueprint(g)
    counts = Counter(v for t in bp.tokens for v in t.primitive.global_map)
    assert set(counts) == set(range(g.n_atoms))
    # every token but the first of each component hangs off an earlier one
    for t, par in enumerate(bp.parents):
        assert par is None or par < t
    # anchors are exactly the atoms shared with another token
    for t in bp.tokens:
        shared = {a for a, v in enumerate(t.primitive.global_map) if counts[v] > 1}
        assert {s.local_atom for s in t.anchors} == shared


def test_parent_overlap_types_match_shared_bonds():
    for smi in [TOLUENE, NAPHTHALENE, "C1CC2CCC1C2", "CC(C)(C)C1=CC=NC=C1"]:
        bp = extract_blueprint(parse_smiles(smi))
        for t, par in enumerate(bp.parents):
            if par is None:
                continue
            both = bp.tokens[t].primitive.global_edges() & bp.tokens[par].primitive.global_edges()
            assert bp.merge_types[t] == ("edge" if both else "node")
        assert list(itertools.accumulate(1 for p in bp.parents if p is None))[-1] == 1
