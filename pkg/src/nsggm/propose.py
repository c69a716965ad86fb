"""Blueprint proposals from the n-gram surrogate or from an external file."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .decompose import Blueprint
from .vocab import BOS, EOS, Vocabulary

DEFAULT_MAX_LEN = 12
PROPOSAL_VERSION = 1


class ProposalParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnknownToken(ProposalParseError):
    pass


class InvalidVariant(ProposalParseError):
    pass


@dataclass(frozen=True)
class ProposalSequence:
    tokens: tuple[str, ...]
    seed: int | None = None
    temperature: float = 1.0

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class GuidanceAnnotations:
    variants: tuple[str, ...]
    merges: tuple[str | None, ...]
    parents: tuple[int | None, ...]  # 0-based; position 0 is the root


def _reweight(dist: dict[str, float], temperature: float) -> dict[str, float]:
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        best = max(dist.values())
        winner = min(k for k, p in dist.items() if p == best)
        return {k: float(k == winner) for k in dist}
    w = {k: p ** (1.0 / temperature) for k, p in dist.items()}
    z = sum(w.values())
    return {k: x / z for k, x in w.items()}


def _draw(rng: random.Random, dist: dict[str, float]):
    keys = sorted(dist)
    return rng.choices(keys, weights=[dist[k] for k in keys])[0]


def sample_sequence(
    vocab: Vocabulary,
    seed: int | None = None,
    temperature: float = 1.0,
    max_len: int = DEFAULT_MAX_LEN,
    rng: random.Random | None = None,
) -> ProposalSequence:
    """Autoregressive draw from the smoothed order-2 transition table."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    rng = rng or random.Random(seed)
    keys = vocab.motif_keys
    out: list[str] = []
    prev2, prev1 = BOS, BOS
    while len(out) < max_len:
        support = keys if not out else keys + [EOS]
        dist = _reweight(vocab.stats.next_distribution(prev2, prev1, support), temperature)
        nxt = _draw(rng, dist)
        if nxt == EOS:
            break
        out.append(nxt)
        prev2, prev1 = prev1, nxt
    return ProposalSequence(tuple(out), seed, temperature)


def annotate(
    seq: ProposalSequence,
    vocab: Vocabulary,
    seed: int | None = None,
    temperature: float = 1.0,
    rng: random.Random | None = None,
) -> GuidanceAnnotations:
    """Variant, parent and merge-type guidance for each position."""
    rng = rng or random.Random(seed)
    stats = vocab.stats
    variants, merges, parents = [], [], []
    for pos, key in enumerate(seq.tokens):
        if key not in vocab:
            raise UnknownToken(f"token {key} is not in the vocabulary")
        entry = vocab[key]
        variants.append(_draw(rng, _reweight(stats.variant_distribution(entry), temperature)))
        if pos == 0:
            parents.append(None)
            merges.append(None)
            continue
        pdist = {str(j): stats.parent_weight(key, seq.tokens[j]) for j in range(pos)}
        z = sum(pdist.values())
        par = int(_draw(rng, _reweight({k: w / z for k, w in pdist.items()}, temperature)))
        parents.append(par)
        merges.append(_draw(rng, _reweight(stats.merge_distribution(seq.tokens[par], key), temperature)))
    return GuidanceAnnotations(tuple(variants), tuple(merges), tuple(parents))


def proposal_blueprint(
    vocab: Vocabulary, seq: ProposalSequence, ann: GuidanceAnnotations | None
) -> Blueprint:
    """Instantiate tokens for a proposal; without annotations every slot is open."""
    tokens = []
    for pos, key in enumerate(seq.tokens):
        entry = vocab[key]
        tokens.append(entry.token(ann.variants[pos] if ann else None))
    if ann is None:
        return Blueprint(tuple(tokens), (None,) * len(tokens), (None,) * len(tokens))
    return Blueprint(tuple(tokens), ann.parents, ann.merges)


# -- external proposals ----------------------------------------------------


def _check_forest(parents: list[int | None], line: int) -> None:
    n = len(parents)
    for start in range(n):
        seen, cur = set(), start
        while parents[cur] is not None:
            if cur in seen:
                raise ProposalParseError("parent pointers contain a cycle", line)
            seen.add(cur)
            cur = parents[cur]


def parse_proposal_record(rec: dict, vocab: Vocabulary, line: int):
    if not isinstance(rec, dict):
        raise ProposalParseError("record must be a JSON object", line)
    if rec.get("version", PROPOSAL_VERSION) != PROPOSAL_VERSION:
        raise ProposalParseError(f"unsupported proposal version {rec.get('version')}", line)
    try:
        tokens = list(rec["tokens"])
        variants = list(rec["variants"])
        merges = list(rec["merges"])
        parents = list(rec["parents"])
    except (KeyError, TypeError) as exc:
        raise ProposalParseError(f"missing or malformed field {exc}", line) from exc
    n = len(tokens)
    if n == 0:
        raise ProposalParseError("empty token list", line)
    if not (len(variants) == len(merges) == len(parents) == n):
        raise ProposalParseError("tokens/variants/merges/parents lengths differ", line)
    for pos, key in enumerate(tokens):
        if key not in vocab:
            raise UnknownToken(f"unknown token {key!r} at position {pos}", line)
        if vocab[key].variant(variants[pos]) is None:
            raise InvalidVariant(f"variant {variants[pos]!r} not allowed for token at position {pos}", line)
    if parents[0] is not None or merges[0] is not None:
        raise ProposalParseError("position 0 must be the root (null parent and merge)", line)
    for pos in range(1, n):
        p = parents[pos]
        if p is None:
            if merges[pos] is not None:
                raise ProposalParseError(f"merge type without parent at position {pos}", line)
            continue
        if not isinstance(p, int) or not 0 <= p < n or p == pos:
            raise ProposalParseError(f"bad parent index {p!r} at position {pos}", line)
        if merges[pos] not in ("node", "edge"):
            raise ProposalParseError(f"bad merge type {merges[pos]!r} at position {pos}", line)
    _check_forest(parents, line)
    return ProposalSequence(tuple(tokens)), GuidanceAnnotations(tuple(variants), tuple(merges), tuple(parents))


def load_external_proposals(path: str | Path, vocab: Vocabulary):
    """Read a JSON-lines proposal file (blank lines and ``#`` comments skipped)."""
    out = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProposalParseError(f"invalid JSON: {exc.msg}", lineno) from exc
        out.append(parse_proposal_record(rec, vocab, lineno))
    return out


def dump_proposal(seq: ProposalSequence, ann: GuidanceAnnotations) -> str:
    return json.dumps(
        {
            "version": PROPOSAL_VERSION,
            "tokens": list(seq.tokens),
            "variants": list(ann.variants),
            "merges": list(ann.merges),
            "parents": list(ann.parents),
        }
    )
