"""Generation attempts: proposal, assembly and decoding in one place.

One attempt draws a proposal from the n-gram surrogate, optionally injects
scaffold tokens and a compiled logical constraint, solves the assembly
problem and decodes the model.  Attempts are independent and seeded by
``(seed, index)`` so runs are reproducible and can be farmed out to a
process pool.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .assemble import (
    Assembly,
    AssemblyProblem,
    Budget,
    Realization,
    SoundnessViolation,
    Weights,
    build_problem,
    decode_graph,
    encode_user,
    solve,
)
from .assemble.candidates import node_merge_legal
from .assemble.smtlib import run_external
from .decompose import Blueprint, extract_blueprint, make_token, witness_merges
from .logic import Expr, ScaffoldLibrary, atoms_of, compile_to_solver, evaluate, models
from .molgraph import (
    MolGraph,
    canonical_key,
    find_substructure,
    get_element,
    parse_smiles,
    validate_valence,
    write_smiles,
)
from .propose import GuidanceAnnotations, ProposalSequence, annotate, proposal_blueprint, sample_sequence
from .vocab import Vocabulary

MODES = ("full", "no-guidance", "no-solver")
DEFAULT_NODES = 4_000


@dataclass(frozen=True)
class GenerateConfig:
    mode: str = "full"
    weights: Weights = field(default_factory=Weights)
    # node budget keeps runs deterministic; the time limit is only a safety net
    budget: Budget = field(default_factory=lambda: Budget(time_ms=5000, nodes=DEFAULT_NODES))
    temperature: float = 1.0
    max_len: int = 12
    backend: str = "builtin"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.backend != "builtin" and not self.backend.startswith("external:"):
            raise ValueError("backend must be 'builtin' or 'external:<path>'")


@dataclass
class Record:
    attempt: int
    status: str  # SAT | UNSAT | TimedOut | unchecked
    smiles: str = ""
    key: str = ""
    objective: float | None = None
    seconds: float = 0.0
    valid: bool = False
    satisfied: bool | None = None
    note: str = ""
    nodes: int = 0
    optimal: bool = False
    dropped: int = 0  # blueprint tokens left outside the root's component


@dataclass
class GenerationRun:
    mode: str
    records: list[Record] = field(default_factory=list)
    certificate: str = ""

    def counts(self) -> dict[str, int]:
        c = {"attempts": len(self.records), "sat": 0, "unsat": 0, "timeouts": 0, "unchecked": 0}
        for r in self.records:
            c[{"SAT": "sat", "UNSAT": "unsat", "TimedOut": "timeouts"}.get(r.status, "unchecked")] += 1
        return c

    def satisfiers(self) -> list[Record]:
        return [r for r in self.records if r.satisfied]

    def series(self) -> list[int]:
        """Cumulative number of verified satisfiers after each attempt."""
        out, n = [], 0
        for r in self.records:
            n += bool(r.satisfied)
            out.append(n)
        return out


# -- scaffold injection --------------------------------------------------------


def scaffold_tokens(scaffold: MolGraph, vocab: Vocabulary) -> Blueprint:
    """Decompose a scaffold with the vocabulary's settings and open its free valences."""
    sb = extract_blueprint(scaffold, vocab.tree_support(), vocab.tau, vocab.max_size, vocab.max_depth)
    tokens = []
    for t in sb.tokens:
        g = t.primitive.graph
        free = {a for a in range(g.n_atoms) if get_element(g.elements[a]).cap > g.bond_sum(a)}
        tokens.append(make_token(t.primitive, sorted(free | {s.local_atom for s in t.anchors})))
    return Blueprint(tuple(tokens), sb.parents, sb.merge_types, scaffold)


def inject(bp: Blueprint, scaffold: MolGraph, name: str, vocab: Vocabulary) -> tuple[Blueprint, Realization]:
    """Append a scaffold's tokens to ``bp``; the realization reassembles it."""
    sb = scaffold_tokens(scaffold, vocab)
    off = len(bp.tokens)
    merges = tuple((ti + off, a, tj + off, b) for ti, a, tj, b in witness_merges(sb))
    parents = tuple(None if p is None else p + off for p in sb.parents)
    out = Blueprint(bp.tokens + sb.tokens, tuple(bp.parents) + parents, tuple(bp.merge_types) + sb.merge_types, None)
    return out, Realization(name, tuple(range(off, off + len(sb.tokens))), merges)


# -- the no-solver ablation ----------------------------------------------------


def greedy_assembly(bp: Blueprint) -> Assembly:
    """Merge every token into its parent at the first pairwise-legal anchor pair.

    Capacity already consumed by earlier merges is not tracked, so two
    children may pile onto the same atom; the result is decoded as is.
    """
    ident = []
    kept = {0} if bp.tokens else set()
    for child in range(1, len(bp.tokens)):
        par = bp.parents[child] if bp.parents and bp.parents[child] is not None else child - 1
        tp, tc = bp.tokens[par], bp.tokens[child]
        pair = next(
            (
                (s.local_atom, t.local_atom)
                for s in tp.anchors
                for t in tc.anchors
                if node_merge_legal(tp, s.local_atom, tc, t.local_atom)
            ),
            None,
        )
        if pair is None or par not in kept:
            continue
        kept.add(child)
        ident.append((par, pair[0], child, pair[1]))
    return Assembly(tuple(ident), (), tuple(sorted(kept)), 0)


# -- attempts ------------------------------------------------------------------


@dataclass(frozen=True)
class Task:
    """What one attempt must do beyond plain unconstrained generation."""

    forced: tuple[tuple[str, str], ...] = ()  # (name, smiles) scaffolds that must appear
    expr: Expr | None = None
    library: ScaffoldLibrary | None = None


def attempt_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"nsggm:{seed}:{index}")


def uniform_annotations(seq: ProposalSequence, vocab: Vocabulary, rng: random.Random) -> GuidanceAnnotations:
    """Ablated guidance: a uniformly chosen stored variant and no parents."""
    variants = tuple(rng.choice(vocab[k].variants).key for k in seq.tokens)
    n = len(seq.tokens)
    return GuidanceAnnotations(variants, (None,) * n, (None,) * n)


class Generator:
    def __init__(
        self,
        vocab: Vocabulary,
        config: GenerateConfig | None = None,
        task: Task | None = None,
        proposals: list[tuple[ProposalSequence, GuidanceAnnotations]] | None = None,
    ):
        self.vocab = vocab
        self.proposals = proposals
        self.config = config or GenerateConfig()
        self.task = task or Task()
        self._contains: dict[tuple[str, str], bool] = {}
        self._models = models(self.task.expr) if self.task.expr is not None else None
        self._forced = [(n, parse_smiles(s)) for n, s in self.task.forced]

    def propose(self, rng: random.Random, index: int = 0) -> Blueprint:
        """Sampled proposal, or the ``index``-th external one when a proposal file was given."""
        cfg = self.config
        if self.proposals:
            seq, ann = self.proposals[index % len(self.proposals)]
        else:
            seq = sample_sequence(self.vocab, temperature=cfg.temperature, max_len=cfg.max_len, rng=rng)
            ann = annotate(seq, self.vocab, temperature=cfg.temperature, rng=rng)
        if cfg.mode == "no-guidance":
            ann = uniform_annotations(seq, self.vocab, rng)
        return proposal_blueprint(self.vocab, seq, ann)

    def _token_contains(self, bp: Blueprint, t: int, sym: str) -> bool:
        tok = bp.tokens[t]
        key = (tok.motif_key, sym)
        if key not in self._contains:
            self._contains[key] = find_substructure(tok.graph, self.task.library[sym])[0]
        return self._contains[key]

    def run_one(self, seed: int, index: int) -> Record:
        start = time.perf_counter()
        rng = attempt_rng(seed, index)
        bp = self.propose(rng, index)
        cfg = self.config
        if cfg.mode == "no-solver":
            return self._raw(index, bp, start)
        realizations: list[Realization] = []
        for name, g in self._forced:
            bp, r = inject(bp, g, name, self.vocab)
            realizations.append(r)
        expr, lib = self.task.expr, self.task.library
        model: dict[str, bool] = {}
        if expr is not None:
            model = rng.choice(self._models) if self._models else {}
            for sym in sorted(s for s, v in model.items() if v):
                bp, r = inject(bp, lib[sym], sym, self.vocab)
                realizations.append(r)
        problem = build_problem(bp, cfg.weights, guided=cfg.mode == "full")
        lits = encode_user(problem, realizations, forced=[n for n, _ in self._forced])
        if expr is not None:
            atom_lits = {}
            for sym in atoms_of(expr):
                ins = list(lits.get(sym, []))
                ins += [problem.reach[t] for t in range(len(bp.tokens)) if self._token_contains(bp, t, sym)]
                atom_lits[sym] = problem.gate(f"atom_{sym}", "or", ins)
                problem.branch_first.append(atom_lits[sym])
                problem.hints[atom_lits[sym]] = model.get(sym, False)
            compile_to_solver(expr, problem, atom_lits)
        res = self._solve(problem)
        rec = Record(index, res.status, objective=res.objective, note=res.reason or "")
        rec.nodes, rec.optimal = res.nodes, res.optimal
        if res.status == "SAT":
            rec.dropped = sum(not res.values[r] for r in problem.reach)
            try:
                g = decode_graph(bp, (problem, res))
            except SoundnessViolation as exc:  # pragma: no cover - would be a solver bug
                rec.note = f"soundness: {exc}"
                g = None
            if g is not None:
                rec.smiles = write_smiles(g)
                rec.key = canonical_key(g)
                rec.valid = validate_valence(g).ok and g.is_connected()
                if expr is not None:
                    rec.satisfied = rec.valid and evaluate(expr, g, lib)[0]
                    if rec.valid and not rec.satisfied:
                        rec.note = "rejected by recheck"
        rec.seconds = time.perf_counter() - start
        return rec

    def _solve(self, problem: AssemblyProblem):
        if self.config.backend == "builtin":
            return solve(problem, self.config.budget)
        timeout = (self.config.budget.time_ms or 60_000) / 1000.0
        return run_external(problem, self.config.backend.split(":", 1)[1], timeout)

    def _raw(self, index: int, bp: Blueprint, start: float) -> Record:
        g = decode_graph(bp, greedy_assembly(bp), strict=False)
        valid = validate_valence(g).ok and g.is_connected()
        rec = Record(index, "unchecked", write_smiles(g), canonical_key(g) if valid else "", valid=valid)
        rec.seconds = time.perf_counter() - start
        return rec


def _worker(args):
    gen, seed, indices = args
    return [gen.run_one(seed, i) for i in indices]


def run(gen: Generator, n: int, seed: int = 0, threads: int = 1, mode_label: str | None = None) -> GenerationRun:
    """Run ``n`` attempts; results are independent of ``threads``."""
    indices = list(range(n))
    if threads <= 1 or n < 2:
        records = [gen.run_one(seed, i) for i in indices]
    else:
        chunks = [indices[k::threads] for k in range(threads)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_worker, [(gen, seed, c) for c in chunks]))
        records = sorted((r for part in parts for r in part), key=lambda r: r.attempt)
    return GenerationRun(mode_label or gen.config.mode, records)
