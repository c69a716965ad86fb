import json
import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsggm.decompose import extract_blueprint
from nsggm.molgraph import parse_smiles
from nsggm.propose import (
    InvalidVariant,
    ProposalParseError,
    UnknownToken,
    annotate,
    dump_proposal,
    load_external_proposals,
    proposal_blueprint,
    sample_sequence,
)
from nsggm.vocab import build_vocabulary

BENZENE = parse_smiles("C1=CC=CC=C1")
TOLUENE = parse_smiles("CC1=CC=CC=C1")
NAPHTHALENE = parse_smiles("C1=CC=C2C=CC=CC2=C1")


def test_same_seed_same_sequence(corpus_vocab):
    a = [sample_sequence(corpus_vocab, seed=s) for s in range(20)]
    b = [sample_sequence(corpus_vocab, seed=s) for s in range(20)]
    assert a == b
    assert len({x.tokens for x in a}) > 1


@pytest.mark.parametrize("smi", ["CC1=CC=CC=C1", "C1=CC=C2C=CC=CC2=C1", "NC(=O)C1=CC=NC=C1"])
def test_greedy_decoding_replays_single_molecule(smi):
    g = parse_smiles(smi)
    v = build_vocabulary([g])
    assert sample_sequence(v, seed=0, temperature=0).tokens == extract_blueprint(g).motif_keys


def test_max_len_one_gives_one_token(corpus_vocab):
    assert all(len(sample_sequence(corpus_vocab, seed=s, max_len=1)) == 1 for s in range(30))
    with pytest.raises(ValueError):
        sample_sequence(corpus_vocab, seed=0, max_len=0)


def test_first_token_frequencies_within_three_sigma():
    # benzene x2 and toluene: first-token counts ring=3, methyl=0; unit smoothing over 2 motifs
    v = build_vocabulary([BENZENE, BENZENE, TOLUENE], smoothing=1.0)
    assert len(v.entries) == 2
    ring = next(k for k, e in v.entries.items() if e.kind == "cycle")
    p = (3 + 1) / (3 + 2)
    n = 10_000
    rng = random.Random(123)
    hits = sum(sample_sequence(v, rng=rng).tokens[0] == ring for _ in range(n))
    sigma = math.sqrt(n * p * (1 - p))
    assert abs(hits - n * p) <= 3 * sigma


def test_single_token_has_no_parent(corpus_vocab):
    seq = sample_sequence(corpus_vocab, seed=3, max_len=1)
    ann = annotate(seq, corpus_vocab, seed=3)
    assert ann.parents == (None,) and ann.merges == (None,)


def test_ring_pair_merge_type_follows_corpus():
    corpus = [NAPHTHALENE] * 3 + [parse_smiles("C1=CC=C(C=C1)C1=CC=CC=C1")]
    v = build_vocabulary(corpus)
    bp = extract_blueprint(NAPHTHALENE)
    first, second = bp.motif_keys
    # oracle: count ground-truth merge types for this parent/child pair by hand
    seen = Counter()
    for g in corpus:
        b = extract_blueprint(g)
        for t, par in enumerate(b.parents):
            if par is not None and (b.motif_keys[par], b.motif_keys[t]) == (first, second):
                seen[b.merge_types[t]] += 1
    assert seen == Counter(edge=3)
    a = v.stats.smoothing
    p_edge = (3 + a) / (3 + 2 * a)
    dist = v.stats.merge_distribution(first, second)
    assert dist == pytest.approx({"edge": p_edge, "node": 1 - p_edge})
    seq = sample_sequence(v, temperature=0)
    assert seq.tokens == (first, second)
    rng = random.Random(0)
    draws = Counter(annotate(seq, v, rng=rng).merges[1] for _ in range(4000))
    assert abs(draws["edge"] / 4000 - p_edge) <= 3 * math.sqrt(p_edge * (1 - p_edge) / 4000) + 1e-9


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), temp=st.sampled_from([0.0, 0.5, 1.0, 2.0]))
def test_annotations_respect_support_and_form_a_forest(corpus_vocab, seed, temp):
    seq = sample_sequence(corpus_vocab, seed=seed, temperature=temp)
    ann = annotate(seq, corpus_vocab, seed=seed, temperature=temp)
    for pos, key in enumerate(seq.tokens):
        assert corpus_vocab[key].variant(ann.variants[pos]) is not None
        par = ann.parents[pos]
        assert par != pos
        assert par is None or par < pos
        assert (par is None) == (ann.merges[pos] is None)
    bp = proposal_blueprint(corpus_vocab, seq, ann)
    assert [t.variant_key for t in bp.tokens] == list(ann.variants)


# -- external proposals --------------------------------------------------------


def _write(tmp_path, lines):
    path = tmp_path / "p.jsonl"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_well_formed_file_round_trips(tmp_path, corpus_vocab):
    props = []
    for s in range(3):
        seq = sample_sequence(corpus_vocab, seed=s)
        props.append((seq, annotate(seq, corpus_vocab, seed=s)))
    path = _write(tmp_path, ["# three proposals"] + [dump_proposal(a, b) for a, b in props])
    back = load_external_proposals(path, corpus_vocab)
    assert [(a.tokens, b) for a, b in back] == [(a.tokens, b) for a, b in props]


def test_empty_file_is_empty_list(tmp_path, corpus_vocab):
    assert load_external_proposals(_write(tmp_path, [""]), corpus_vocab) == []


def _record(vocab, **over):
    seq = sample_sequence(vocab, seed=11, max_len=3)
    while len(seq) < 2:
        seq = sample_sequence(vocab, seed=len(seq) + 12, max_len=3)
    rec = json.loads(dump_proposal(seq, annotate(seq, vocab, seed=11)))
    rec.update(over)
    return rec


def test_bad_variant_names_the_row(tmp_path, corpus_vocab):
    rec = _record(corpus_vocab)
    rec["variants"][1] = "not-a-variant"
    good = json.dumps(_record(corpus_vocab))
    path = _write(tmp_path, [good, json.dumps(rec)])
    with pytest.raises(InvalidVariant) as exc:
        load_external_proposals(path, corpus_vocab)
    assert exc.value.line == 2


@pytest.mark.parametrize(
    "mutate, error",
    [
        (lambda r: r["tokens"].__setitem__(0, "bogus"), UnknownToken),
        (lambda r: r["parents"].__setitem__(1, 1), ProposalParseError),
        (lambda r: r["parents"].__setitem__(0, 1), ProposalParseError),
        (lambda r: r["merges"].__setitem__(1, "glue"), ProposalParseError),
        (lambda r: r.__setitem__("tokens", []), ProposalParseError),
        (lambda r: r.pop("variants"), ProposalParseError),
        (lambda r: r.__setitem__("version", 7), ProposalParseError),
    ],
)
def test_malformed_records_rejected(tmp_path, corpus_vocab, mutate, error):
    rec = _record(corpus_vocab)
    mutate(rec)
    with pytest.raises(error):
        load_external_proposals(_write(tmp_path, [json.dumps(rec)]), corpus_vocab)


def test_invalid_json_rejected(tmp_path, corpus_vocab):
    with pytest.raises(ProposalParseError):
        load_external_proposals(_write(tmp_path, ["{not json"]), corpus_vocab)
