"""Motif vocabulary, characterisation variants, motif graphs and n-gram statistics."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .decompose import Blueprint, Primitive, Token, decompose_corpus, make_token
from .decompose.trees import DEFAULT_MAX_DEPTH, DEFAULT_MAX_SIZE, DEFAULT_TAU
from .molgraph import CanonicalKey, MolGraph, canonical_key, find_isomorphism, write_smiles

BOS = "<s>"
EOS = "</s>"
DEFAULT_K = 8
# Additive smoothing constant.  Add-one over ~50 motifs hands most of the mass
# in sparse contexts to arbitrary tokens and drives proposals to max length.
DEFAULT_SMOOTHING = 0.01
SCHEMA = "nsggm-vocab"
SCHEMA_VERSION = 1


class EmptyCorpus(ValueError):
    pass


class SchemaVersionMismatch(ValueError):
    pass


class IoFailure(OSError):
    pass


@dataclass(frozen=True)
class Variant:
    key: CanonicalKey
    anchors: tuple[int, ...]  # exemplar-local atoms open for merging
    count: int


@dataclass(frozen=True)
class MotifEntry:
    motif_key: CanonicalKey
    kind: str
    exemplar: MolGraph
    frequency: int
    variants: tuple[Variant, ...]

    @property
    def primitive(self) -> Primitive:
        edges = tuple((i, j) for i, j, _ in self.exemplar.bonds) if self.kind == "cycle" else ()
        return Primitive(self.kind, self.exemplar, None, edges)

    def variant(self, key: CanonicalKey) -> Variant | None:
        for v in self.variants:
            if v.key == key:
                return v
        return None

    def token(self, variant: Variant | CanonicalKey | None = None) -> Token:
        """Token for this motif; ``None`` gives the fully open configuration."""
        if variant is None:
            return make_token(self.primitive)
        if not isinstance(variant, Variant):
            found = self.variant(variant)
            if found is None:
                raise KeyError(f"variant {variant} not stored for motif {self.motif_key}")
            variant = found
        return make_token(self.primitive, variant.anchors)


@dataclass(frozen=True)
class MotifGraph:
    n_nodes: int
    edges: tuple[tuple[int, int, int], ...]  # (i, j, r) with r=1 for a shared bond

    def is_connected(self) -> bool:
        if self.n_nodes <= 1:
            return True
        adj: dict[int, set[int]] = {i: set() for i in range(self.n_nodes)}
        for i, j, _ in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        seen, stack = {0}, [0]
        while stack:
            for u in adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.n_nodes


def motif_graph(bp: Blueprint) -> MotifGraph:
    atom_sets, edge_sets = [], []
    for tok in bp.tokens:
        if tok.primitive.global_map is None:
            raise ValueError("motif graph needs a blueprint extracted from a molecule")
        atom_sets.append(set(tok.primitive.global_map))
        edge_sets.append(tok.primitive.global_edges())
    edges = []
    for i in range(len(bp.tokens)):
        for j in range(i + 1, len(bp.tokens)):
            if atom_sets[i] & atom_sets[j]:
                edges.append((i, j, 1 if edge_sets[i] & edge_sets[j] else 0))
    return MotifGraph(len(bp.tokens), tuple(edges))


@dataclass
class VocabStats:
    transitions: dict[tuple[str, str], Counter] = field(default_factory=dict)
    variant_counts: dict[str, Counter] = field(default_factory=dict)
    merge_counts: dict[tuple[str, str], Counter] = field(default_factory=dict)
    parent_counts: dict[tuple[str, str], int] = field(default_factory=dict)
    smoothing: float = DEFAULT_SMOOTHING

    def next_distribution(self, prev2: str, prev1: str, support: Iterable[str]) -> dict[str, float]:
        """Add-one smoothed P(next | prev2, prev1) over ``support`` (which should include EOS)."""
        counts = self.transitions.get((prev2, prev1), Counter())
        support = list(support)
        total = sum(counts[t] for t in support) + self.smoothing * len(support)
        return {t: (counts[t] + self.smoothing) / total for t in support}

    def variant_distribution(self, entry: MotifEntry) -> dict[str, float]:
        counts = self.variant_counts.get(entry.motif_key, Counter())
        keys = [v.key for v in entry.variants]
        total = sum(counts[k] for k in keys) + self.smoothing * len(keys)
        return {k: (counts[k] + self.smoothing) / total for k in keys}

    def merge_distribution(self, parent: str, child: str) -> dict[str, float]:
        counts = self.merge_counts.get((parent, child), Counter())
        total = counts["node"] + counts["edge"] + 2 * self.smoothing
        return {m: (counts[m] + self.smoothing) / total for m in ("node", "edge")}

    def parent_weight(self, child: str, parent: str) -> float:
        return self.parent_counts.get((child, parent), 0) + self.smoothing

    def to_json(self) -> dict:
        return {
            "smoothing": self.smoothing,
            "transitions": sorted(
                [a, b, t, c] for (a, b), cnt in self.transitions.items() for t, c in cnt.items()
            ),
            "variants": sorted([m, v, c] for m, cnt in self.variant_counts.items() for v, c in cnt.items()),
            "merges": sorted(
                [p, ch, t, c] for (p, ch), cnt in self.merge_counts.items() for t, c in cnt.items()
            ),
            "parents": sorted([ch, p, c] for (ch, p), c in self.parent_counts.items()),
        }

    @classmethod
    def from_json(cls, d: dict) -> "VocabStats":
        st = cls(smoothing=float(d["smoothing"]))
        for a, b, t, c in d["transitions"]:
            st.transitions.setdefault((a, b), Counter())[t] = c
        for m, v, c in d["variants"]:
            st.variant_counts.setdefault(m, Counter())[v] = c
        for p, ch, t, c in d["merges"]:
            st.merge_counts.setdefault((p, ch), Counter())[t] = c
        for ch, p, c in d["parents"]:
            st.parent_counts[(ch, p)] = c
        return st

    def digest(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def fit_proposal_stats(blueprints: Iterable[Blueprint], smoothing: float = DEFAULT_SMOOTHING) -> VocabStats:
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    st = VocabStats(smoothing=smoothing)
    for bp in blueprints:
        keys = list(bp.motif_keys)
        ctx = [BOS, BOS] + keys + [EOS]
        for k in range(2, len(ctx)):
            st.transitions.setdefault((ctx[k - 2], ctx[k - 1]), Counter())[ctx[k]] += 1
        for tok in bp.tokens:
            st.variant_counts.setdefault(tok.motif_key, Counter())[tok.variant_key] += 1
        for t, par in enumerate(bp.parents):
            if par is None:
                continue
            child, parent = keys[t], keys[par]
            st.merge_counts.setdefault((parent, child), Counter())[bp.merge_types[t]] += 1
            st.parent_counts[(child, parent)] = st.parent_counts.get((child, parent), 0) + 1
    return st


@dataclass
class Vocabulary:
    entries: dict[CanonicalKey, MotifEntry]
    stats: VocabStats
    k: int = DEFAULT_K
    tau: int = DEFAULT_TAU
    max_size: int = DEFAULT_MAX_SIZE
    max_depth: int = DEFAULT_MAX_DEPTH
    corpus_keys: frozenset[str] = frozenset()

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def __getitem__(self, key: str) -> MotifEntry:
        return self.entries[key]

    @property
    def motif_keys(self) -> list[str]:
        return sorted(self.entries)

    def tree_support(self) -> Counter:
        """Support table that makes every vocabulary tree motif frequent."""
        return Counter({k: self.tau for k, e in self.entries.items() if e.kind == "tree"})

    def variant_coverage(self, blueprints: Iterable[Blueprint]) -> float:
        hit = total = 0
        for bp in blueprints:
            for tok in bp.tokens:
                total += 1
                entry = self.entries.get(tok.motif_key)
                hit += entry is not None and entry.variant(tok.variant_key) is not None
        return hit / total if total else 1.0


def build_vocabulary(
    corpus: list[MolGraph],
    k: int = DEFAULT_K,
    tau: int = DEFAULT_TAU,
    max_size: int = DEFAULT_MAX_SIZE,
    max_depth: int = DEFAULT_MAX_DEPTH,
    blueprints: list[Blueprint] | None = None,
    smoothing: float = DEFAULT_SMOOTHING,
) -> Vocabulary:
    """Discover motifs, top-``k`` variants and proposal statistics from a corpus."""
    if not corpus:
        raise EmptyCorpus("corpus is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    if blueprints is None:
        blueprints, _ = decompose_corpus(corpus, tau, max_size, max_depth)
    freq: Counter = Counter()
    exemplars: dict[str, Token] = {}
    variant_counts: dict[str, Counter] = {}
    variant_anchors: dict[tuple[str, str], tuple[int, ...]] = {}
    for bp in blueprints:
        for tok in bp.tokens:
            mk = tok.motif_key
            freq[mk] += 1
            exemplars.setdefault(mk, tok)
            variant_counts.setdefault(mk, Counter())[tok.variant_key] += 1
            if (mk, tok.variant_key) not in variant_anchors:
                ex = exemplars[mk].graph
                iso = find_isomorphism(tok.graph, ex)
                if iso is None:
                    raise RuntimeError("canonical key collision between non-isomorphic motifs")
                variant_anchors[(mk, tok.variant_key)] = tuple(sorted(iso[s.local_atom] for s in tok.anchors))
    entries = {}
    for mk in sorted(freq):
        ranked = sorted(variant_counts[mk].items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        variants = tuple(Variant(v, variant_anchors[(mk, v)], c) for v, c in ranked)
        tok = exemplars[mk]
        entries[mk] = MotifEntry(mk, tok.kind, tok.graph, freq[mk], variants)
    return Vocabulary(
        entries,
        fit_proposal_stats(blueprints, smoothing),
        k,
        tau,
        max_size,
        max_depth,
        frozenset(canonical_key(g) for g in corpus),
    )


# -- persistence -----------------------------------------------------------


def vocab_to_json(v: Vocabulary) -> dict:
    return {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "params": {"k": v.k, "tau": v.tau, "max_size": v.max_size, "max_depth": v.max_depth},
        "motifs": [
            {
                "key": e.motif_key,
                "kind": e.kind,
                "smiles": write_smiles(e.exemplar),
                "atoms": list(e.exemplar.elements),
                "bonds": [list(b) for b in e.exemplar.bonds],
                "frequency": e.frequency,
                "variants": [{"key": x.key, "anchors": list(x.anchors), "count": x.count} for x in e.variants],
            }
            for e in (v.entries[k] for k in sorted(v.entries))
        ],
        "stats": v.stats.to_json(),
        "stats_digest": v.stats.digest(),
        "corpus_keys": sorted(v.corpus_keys),
    }


def vocab_from_json(d: dict) -> Vocabulary:
    if not isinstance(d, dict) or d.get("schema") != SCHEMA:
        raise SchemaVersionMismatch("not a vocabulary file")
    if d.get("version") != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"vocabulary schema version {d.get('version')} != {SCHEMA_VERSION}")
    try:
        entries = {}
        for m in d["motifs"]:
            g = MolGraph.build(m["atoms"], [tuple(b) for b in m["bonds"]])
            variants = tuple(Variant(x["key"], tuple(x["anchors"]), x["count"]) for x in m["variants"])
            entries[m["key"]] = MotifEntry(m["key"], m["kind"], g, m["frequency"], variants)
        stats = VocabStats.from_json(d["stats"])
        p = d["params"]
        keys = frozenset(d["corpus_keys"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaVersionMismatch(f"malformed vocabulary file: {exc}") from exc
    if stats.digest() != d.get("stats_digest"):
        raise SchemaVersionMismatch("statistics digest mismatch")
    return Vocabulary(entries, stats, p["k"], p["tau"], p["max_size"], p["max_depth"], keys)


def save_vocab(v: Vocabulary, path: str | Path) -> None:
    try:
        Path(path).write_text(json.dumps(vocab_to_json(v), indent=1, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_vocab(path: str | Path) -> Vocabulary:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaVersionMismatch(f"unreadable vocabulary file: {exc}") from exc
    return vocab_from_json(d)
