import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import merge_count, random_blueprint, small_instance
from nsggm.assemble import (
    Assembly,
    Budget,
    SoundnessViolation,
    Weights,
    assembly_from_model,
    brute_force,
    build_problem,
    decode_graph,
    enumerate_candidates,
    solve,
    verify_soundness,
)
from nsggm.assemble.smtlib import ModelParseError, emit_smtlib, parse_model
from nsggm.decompose import Blueprint, Primitive, extract_blueprint, make_token, witness_merges
from nsggm.molgraph import is_isomorphic, parse_smiles, validate_valence


def ring_token(smiles="C1=CC=CC=C1"):
    g = parse_smiles(smiles)
    return make_token(Primitive("cycle", g, None, tuple((i, j) for i, j, _ in g.bonds)))


def tree_token(smiles):
    return make_token(Primitive("tree", parse_smiles(smiles)))


def bp_of(*tokens, parents=None):
    n = len(tokens)
    parents = parents or (None,) * n
    merges = tuple(None if p is None else "node" for p in parents)
    return Blueprint(tuple(tokens), tuple(parents), merges)


# -- candidates ----------------------------------------------------------------


def test_two_benzenes_have_no_node_candidates():
    assert enumerate_candidates(bp_of(ring_token(), ring_token())).node == []


def test_two_benzenes_share_only_double_bonds():
    bp = bp_of(ring_token(), ring_token())
    cands = enumerate_candidates(bp)
    orders = {(c.edge_a, c.edge_b): c.order for c in cands.edge}
    g = bp.tokens[0].graph
    doubles = [(i, j) for i, j, o in g.bonds if o == 2]
    assert set(orders) == {(a, b) for a in doubles for b in doubles}
    assert set(orders.values()) == {2}
    # both orientations of every double/double pair pass the endpoint arithmetic 3 + 3 - 2 <= 4
    assert len(cands.edge) == 2 * len(doubles) ** 2


def test_ring_carbon_meets_tree_carbon():
    bp = bp_of(ring_token(), tree_token("CC"))
    nodes = {(c.a, c.b) for c in enumerate_candidates(bp).node}
    assert nodes == {(a, b) for a in range(6) for b in range(2)}


# -- hard constraints ----------------------------------------------------------


def test_residual_one_slot_cannot_take_two_bonds():
    # ring carbon has residual 1; two single bonds to lone carbons would need 2
    bp = bp_of(ring_token(), tree_token("C"), tree_token("C"))
    p = build_problem(bp)
    b1 = next(m for m in p.bonds if (m.ti, m.a, m.tj, m.order) == (0, 0, 1, 1))
    b2 = next(m for m in p.bonds if (m.ti, m.a, m.tj, m.order) == (0, 0, 2, 1))
    d = {v: False for v in p.decision}
    d.update({b1.var: True, b2.var: True, p.roots[0]: True})
    assert any(v.startswith("pb:") for v in p.violations(p.complete(d)))


def test_no_candidates_is_trivially_sat():
    p = build_problem(bp_of(ring_token()))
    assert p.identify == [] and p.bonds == [] and p.edges == []
    res = solve(p)
    assert res.sat and res.objective == 10


# -- connectivity objective ----------------------------------------------------


def test_two_tokens_one_link():
    # a lone O and a lone C can only link through one new bond
    bp = bp_of(tree_token("[OH0]"), tree_token("C"))
    p = build_problem(bp)
    res = solve(p)
    assert res.sat and res.objective == 2 * 10 + 1


def test_parent_reward_stacks():
    bp = bp_of(tree_token("[OH0]"), tree_token("C"), parents=(None, 0))
    p = build_problem(bp, guided=True)
    assert solve(p).objective == 2 * 10 + 1 + 5
    assert solve(build_problem(bp, guided=False)).objective == 21


def test_custom_weights_change_objective():
    bp = bp_of(tree_token("[OH0]"), tree_token("C"))
    assert solve(build_problem(bp, Weights(3, 2, 1))).objective == 3 * 2 + 2
    with pytest.raises(ValueError):
        Weights(0, 1, 1)
    assert Weights.parse("1,2,3") == Weights(1, 2, 3)


# -- solving and decoding ------------------------------------------------------


def test_benzene_witness_decodes_to_benzene():
    g = parse_smiles("C1=CC=CC=C1")
    bp = extract_blueprint(g)
    p = build_problem(bp, forced_merges=witness_merges(bp))
    res = solve(p)
    assert res.sat and is_isomorphic(decode_graph(bp, (p, res)), g)


@pytest.mark.parametrize("smi", ["CC1=CC=CC=C1", "C1=CC=C2C=CC=CC2=C1", "CC(C)(C)C1=NC=CS1"])
def test_witness_round_trip(smi):
    g = parse_smiles(smi)
    bp = extract_blueprint(g)
    p = build_problem(bp, forced_merges=witness_merges(bp))
    res = solve(p)
    assert res.sat
    assert is_isomorphic(decode_graph(bp, (p, res)), g)


def test_all_false_model_gives_root_fragment():
    bp = extract_blueprint(parse_smiles("CC1=CC=CC=C1"))
    dec = decode_graph(bp, Assembly((), (), (0,), 0))
    assert is_isomorphic(dec, bp.tokens[0].graph)


def test_fused_bicyclic_from_edge_merge():
    bp = bp_of(ring_token(), ring_token())
    p = build_problem(bp)
    e = p.edges[0]
    d = {v: False for v in p.decision}
    d.update({e.endpoint_vars[0]: True, e.endpoint_vars[1]: True, p.roots[0]: True})
    vals = p.complete(d)
    assert p.violations(vals) == []
    asm = assembly_from_model(p, type("R", (), {"values": vals})())
    g = decode_graph(bp, asm)
    assert g.n_atoms == 10 and g.n_bonds == 11
    assert validate_valence(g).ok


def test_orientations_are_exclusive():
    bp = bp_of(ring_token(), ring_token())
    p = build_problem(bp)
    res = solve(p)
    vals = res.values
    by_pair = {}
    for e in p.edges:
        by_pair.setdefault((e.ti, e.edge_a, e.tj, e.edge_b), []).append(vals[e.var])
    assert all(sum(v) <= 1 for v in by_pair.values())
    # two parallel double bonds identified in both orientations is forbidden outright
    e1, e2 = [e for e in p.edges if (e.edge_a, e.edge_b) == (p.edges[0].edge_a, p.edges[0].edge_b)]
    d = {v: False for v in p.decision}
    d.update({x: True for x in e1.endpoint_vars + e2.endpoint_vars})
    d[p.roots[0]] = True
    assert p.violations(p.complete(d))


# -- soundness -----------------------------------------------------------------


def test_merge_inside_one_token_is_caught():
    bp = bp_of(ring_token(), ring_token())
    asm = Assembly(((0, 0, 0, 3),), (), (0,), 0)
    rep = verify_soundness(bp, asm, bp.tokens[0].graph)
    assert "integrity" in rep.families()


def test_carbon_nitrogen_merge_is_caught():
    bp = bp_of(ring_token(), ring_token("C1=CC=NC=C1"))
    asm = Assembly(((0, 0, 1, 3),), (), (0, 1), 0)
    rep = verify_soundness(bp, asm, bp.tokens[0].graph)
    assert "element" in rep.families()
    with pytest.raises(SoundnessViolation):
        decode_graph(bp, asm)


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 2**32 - 1))
def test_every_sat_decode_is_sound(corpus_vocab, seed):
    rng = random.Random(seed)
    bp = random_blueprint(rng, corpus_vocab, max_tokens=5)
    p = build_problem(bp, guided=rng.random() < 0.5)
    res = solve(p, Budget(time_ms=None, nodes=3000))
    if not res.sat:
        return
    assert p.violations(res.values) == []
    asm = assembly_from_model(p, res)
    g = decode_graph(bp, asm, strict=False)
    assert verify_soundness(bp, asm, g).ok
    assert validate_valence(g).ok and g.is_connected()


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_solver_matches_brute_force(corpus_vocab, seed):
    _, p = small_instance(random.Random(seed), corpus_vocab, max_vars=10)
    a, b = solve(p), brute_force(p)
    assert a.status == b.status and a.objective == b.objective


def test_brute_force_refuses_large_instances(corpus_vocab):
    rng = random.Random(1)
    while True:
        bp = random_blueprint(rng, corpus_vocab, 6)
        p = build_problem(bp)
        if merge_count(p) > 20:
            break
    with pytest.raises(ValueError):
        brute_force(p)


# -- SMT-LIB -------------------------------------------------------------------


def test_emitter_preamble_and_declarations(corpus_vocab):
    _, p = small_instance(random.Random(3), corpus_vocab)
    text = emit_smtlib(p)
    lines = text.splitlines()
    assert lines[1] == "(set-option :produce-models true)" and lines[2].startswith("(set-logic")
    decls = [ln.split()[1] for ln in lines if ln.startswith("(declare-fun")]
    assert len(decls) == len(set(decls))
    assert set(p.names[1:]) <= set(decls)
    assert text.rstrip().endswith("(get-model)")


def test_parse_unsat_and_garbage():
    assert parse_model("unsat\n").status == "UNSAT"
    assert parse_model("unknown\n").status == "TimedOut"
    with pytest.raises(ModelParseError):
        parse_model("")
    with pytest.raises(ModelParseError):
        parse_model("banana\n")


def test_parse_model_round_trip(corpus_vocab):
    _, p = small_instance(random.Random(4), corpus_vocab)
    res = solve(p)
    body = "\n".join(
        f"  (define-fun {p.names[v]} () Bool {'true' if res.values[v] else 'false'})" for v in p.decision
    )
    parsed = parse_model(f"sat\n(\n{body}\n  (define-fun dist_0 () Int (- 0))\n)\n", p)
    assert parsed.sat and parsed.objective == res.objective
