import csv
import random

import pytest

from nsggm.assemble import build_problem, solve
from nsggm.bench import (
    bench_logic,
    bench_scaffold,
    compute_metrics,
    metrics_from_file,
    plot_series,
    read_molecules,
    unsat_certificate,
    write_molecules,
    write_series_csv,
    write_trace,
)
from nsggm.decompose import extract_blueprint
from nsggm.generate import (
    GenerateConfig,
    GenerationRun,
    Generator,
    Record,
    Task,
    attempt_rng,
    greedy_assembly,
    inject,
    run,
)
from nsggm.logic import builtin_benchmarks, default_library, evaluate, parse_expr
from nsggm.molgraph import canonical_key, find_substructure, is_isomorphic, parse_smiles, validate_valence

QUINOLINE = "C1=CC=C2N=CC=CC2=C1"


def test_attempt_rng_is_stable():
    assert attempt_rng(3, 5).random() == attempt_rng(3, 5).random()
    assert attempt_rng(3, 5).random() != attempt_rng(3, 6).random()


def test_config_rejects_unknown_modes():
    with pytest.raises(ValueError):
        GenerateConfig(mode="turbo")
    with pytest.raises(ValueError):
        GenerateConfig(backend="z3")


def test_full_mode_records(corpus_vocab):
    out = run(Generator(corpus_vocab), 40, seed=1)
    c = out.counts()
    assert c["sat"] + c["unsat"] + c["timeouts"] + c["unchecked"] == c["attempts"] == 40
    for r in out.records:
        if r.status == "SAT":
            g = parse_smiles(r.smiles)
            assert r.valid and validate_valence(g).ok and g.is_connected()
            assert r.key == canonical_key(g)


def test_runs_repeat_and_ignore_worker_count(corpus_vocab):
    gen = Generator(corpus_vocab)
    a = run(gen, 6, seed=9)
    b = run(gen, 6, seed=9, threads=2)
    assert [r.smiles for r in a.records] == [r.smiles for r in b.records]


def test_no_guidance_mode_drops_parents(corpus_vocab):
    gen = Generator(corpus_vocab, GenerateConfig(mode="no-guidance"))
    for i in range(10):
        bp = gen.propose(attempt_rng(0, i), i)
        assert all(p is None for p in bp.parents)
    assert all(r.valid for r in run(gen, 15, seed=2).records if r.status == "SAT")


def test_greedy_assembly_reuses_capacity():
    # two methyls onto one ring carbon: legal pairwise, over capacity together
    from nsggm.decompose import Blueprint, Primitive, make_token

    ring = parse_smiles("C1=CC=CC=C1")
    tok = make_token(Primitive("cycle", ring, None, tuple((i, j) for i, j, _ in ring.bonds)), anchors=[0])
    me = make_token(Primitive("tree", parse_smiles("CC")), anchors=[0])
    bp = Blueprint((tok, me, me), (None, 0, 0), (None, "node", "node"))
    asm = greedy_assembly(bp)
    assert asm.identify == ((0, 0, 1, 0), (0, 0, 2, 0))


def test_no_solver_mode_emits_invalid_molecules(corpus_vocab):
    out = run(Generator(corpus_vocab, GenerateConfig(mode="no-solver")), 60, seed=0)
    assert {r.status for r in out.records} == {"unchecked"}
    assert any(not r.valid for r in out.records)
    assert out.counts()["unchecked"] == 60


def test_inject_reassembles_scaffold(corpus_vocab):
    scaffold = parse_smiles(QUINOLINE)
    base = extract_blueprint(parse_smiles("CCO"))
    bp, real = inject(base, scaffold, "quinoline", corpus_vocab)
    assert real.tokens == tuple(range(len(base), len(bp)))
    p = build_problem(bp, forced_merges=real.merges)
    res = solve(p)
    assert res.sat


def test_forced_scaffold_always_present(corpus_vocab):
    gen = Generator(corpus_vocab, task=Task(forced=(("q", QUINOLINE),)))
    q = parse_smiles(QUINOLINE)
    out = run(gen, 12, seed=5)
    assert all(find_substructure(parse_smiles(r.smiles), q)[0] for r in out.records if r.status == "SAT")


def test_external_proposals_drive_generation(corpus_vocab):
    from nsggm.propose import annotate, sample_sequence

    props = []
    for s in range(3):
        seq = sample_sequence(corpus_vocab, seed=s)
        props.append((seq, annotate(seq, corpus_vocab, seed=s)))
    gen = Generator(corpus_vocab, proposals=props)
    bp = gen.propose(attempt_rng(0, 1), 1)
    assert bp.motif_keys == props[1][0].tokens


# -- metrics -------------------------------------------------------------------


def test_metrics_arithmetic():
    smiles = ["CCO", "OCC", "CCN", "C1=CC", "C(C)(C)(C)(C)C"]
    rep = compute_metrics(smiles, attempts=6, corpus_keys={canonical_key(parse_smiles("CCN"))})
    assert rep.valid == 3
    assert rep.validity == pytest.approx(3 / 6)
    assert rep.uniqueness == pytest.approx(2 / 3)
    assert rep.novelty == pytest.approx(1 / 2)
    assert rep.retention is None


def test_retention_counts_scaffold_hits():
    rep = compute_metrics(["CC1=CC=NC=C1", "CC1=CC=CC=C1"], 2, scaffold=parse_smiles("C1=CC=NC=C1"))
    assert rep.retention == pytest.approx(0.5)


def test_metrics_are_recomputable_from_file(tmp_path, corpus_vocab):
    out = run(Generator(corpus_vocab), 12, seed=3)
    path = tmp_path / "m.smi"
    write_molecules(path, out, seed=3)
    attempts, smiles = read_molecules(path)
    assert attempts == 12 and smiles == [r.smiles for r in out.records if r.smiles]
    direct = compute_metrics(smiles, 12, corpus_vocab.corpus_keys)
    assert metrics_from_file(path, corpus_vocab.corpus_keys) == direct
    write_molecules(tmp_path / "m2.smi", out, seed=3)
    assert (tmp_path / "m2.smi").read_bytes() == path.read_bytes()


def test_series_csv_and_plot(tmp_path):
    write_series_csv(tmp_path / "s.csv", {"a": [0, 1, 1], "b": [0, 0]})
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert rows == [["attempt", "a", "b"], ["1", "0", "0"], ["2", "1", "0"], ["3", "1", "0"]]
    plot_series(tmp_path / "s.png", {"a": [0, 1, 1]}, "demo")
    assert (tmp_path / "s.png").read_bytes()[:4] == b"\x89PNG"


def test_trace_rows_follow_records(tmp_path, corpus_vocab):
    out = run(Generator(corpus_vocab), 8, seed=6)
    write_trace(tmp_path / "t.tsv", out)
    rows = list(csv.DictReader(open(tmp_path / "t.tsv"), delimiter="\t"))
    assert [int(r["attempt"]) for r in rows] == list(range(8))
    for r, rec in zip(rows, out.records):
        assert r["status"] == rec.status and int(r["nodes"]) == rec.nodes
        assert int(r["valid"]) == rec.valid and int(r["dropped"]) == rec.dropped


def test_series_is_cumulative():
    recs = [Record(i, "SAT", satisfied=s) for i, s in enumerate([False, True, None, True])]
    assert GenerationRun("logic", recs).series() == [0, 1, 1, 2]


# -- benchmarks ----------------------------------------------------------------


def test_unsat_bench_is_flat_with_certificate(corpus_vocab):
    lib = default_library()
    res = bench_logic(corpus_vocab, builtin_benchmarks()["phi_unsat"], lib, attempts=30)
    assert res.baseline is None
    assert res.series() == {"constraint_driven": [0] * 30}
    assert res.certificate.startswith("truth table: UNSAT; compiled solver: UNSAT")
    assert res.constraint.counts()["unsat"] == 30


def test_unsat_certificate_text(corpus_vocab):
    cert = unsat_certificate(builtin_benchmarks()["phi_unsat"], corpus_vocab, default_library())
    assert "compiled solver: UNSAT" in cert


def test_claimed_satisfiers_pass_recheck(corpus_vocab, corpus_graphs):
    lib = default_library()
    expr = parse_expr("XOR2(P,Q) & !N", lib.symbols())
    res = bench_logic(corpus_vocab, expr, lib, attempts=15, seed=2, corpus=corpus_graphs[:120])
    assert res.constraint.satisfiers()
    for r in res.constraint.satisfiers() + res.baseline.satisfiers():
        assert evaluate(expr, parse_smiles(r.smiles), lib)[0]


def test_scaffold_bench_reports_retention(corpus_vocab):
    run_, rep = bench_scaffold(corpus_vocab, QUINOLINE, 10, seed=1)
    assert rep.retention == 1.0 and rep.validity == 1.0
    assert len(run_.records) == 10


def test_witness_round_trip_sample(corpus_graphs):
    from nsggm.decompose import witness_merges
    from nsggm.assemble import decode_graph

    rng = random.Random(0)
    for g in rng.sample(corpus_graphs, 25):
        bp = extract_blueprint(g)
        p = build_problem(bp, forced_merges=witness_merges(bp))
        res = solve(p)
        assert res.sat and is_isomorphic(decode_graph(bp, (p, res)), g)
