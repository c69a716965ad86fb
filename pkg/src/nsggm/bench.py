"""Benchmark harness: molecule files, metrics, logic and scaffold benchmarks, plots."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .assemble import Budget, build_problem, solve
from .decompose import Blueprint, decompose_corpus
from .generate import GenerateConfig, GenerationRun, Generator, Record, Task, run
from .logic import Expr, ScaffoldLibrary, atoms_of, compile_to_solver, evaluate, sat_check
from .molgraph import MolGraph, SmilesError, canonical_key, find_substructure, parse_smiles, validate_valence
from .vocab import Vocabulary, build_vocabulary

DEFAULT_LOGIC_ATTEMPTS = 5000
FILTER_BOOST = 5


# -- molecule files ------------------------------------------------------------


def write_molecules(path: str | Path, run_: GenerationRun, **meta) -> None:
    """One SMILES per produced molecule, after a ``#`` header carrying the attempt count."""
    head = {"mode": run_.mode, "attempts": len(run_.records), **meta}
    lines = ["# nsggm-molecules " + " ".join(f"{k}={v}" for k, v in head.items())]
    lines += [r.smiles for r in run_.records if r.smiles]
    Path(path).write_text("\n".join(lines) + "\n")


def read_molecules(path: str | Path) -> tuple[int, list[str]]:
    attempts = None
    smiles = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# nsggm-molecules"):
            for part in line.split()[2:]:
                k, _, v = part.partition("=")
                if k == "attempts":
                    attempts = int(v)
        elif line.strip() and not line.startswith("#"):
            smiles.append(line.strip())
    if attempts is None:
        attempts = len(smiles)
    return attempts, smiles


TRACE_FIELDS = ("attempt", "status", "objective", "optimal", "nodes", "seconds", "dropped", "valid", "satisfied", "note")


def write_trace(path: str | Path, run_: GenerationRun) -> None:
    """Per-attempt solver trace as tab-separated columns ``TRACE_FIELDS``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(TRACE_FIELDS)
        for r in run_.records:
            sat = "" if r.satisfied is None else int(r.satisfied)
            obj = "" if r.objective is None else f"{r.objective:g}"
            w.writerow([r.attempt, r.status, obj, int(r.optimal), r.nodes, f"{r.seconds:.4f}", r.dropped, int(r.valid), sat, r.note])


# -- metrics -------------------------------------------------------------------


@dataclass
class MetricsReport:
    attempts: int
    valid: int
    validity: float
    uniqueness: float
    novelty: float
    retention: float | None = None
    series: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        if not self.series:
            d.pop("series")
        return d


def checked_graph(smiles: str) -> MolGraph | None:
    """Parse and validate; ``None`` for anything that is not a valid connected molecule."""
    try:
        g = parse_smiles(smiles)
    except SmilesError:
        return None
    if g.n_atoms == 0 or not g.is_connected() or not validate_valence(g).ok:
        return None
    return g


def compute_metrics(
    smiles: list[str],
    attempts: int,
    corpus_keys: frozenset[str] | set[str] = frozenset(),
    scaffold: MolGraph | None = None,
) -> MetricsReport:
    graphs = [g for g in (checked_graph(s) for s in smiles) if g is not None]
    keys = [canonical_key(g) for g in graphs]
    unique = set(keys)
    valid = len(graphs)
    retention = None
    if scaffold is not None:
        hits = sum(find_substructure(g, scaffold)[0] for g in graphs)
        retention = hits / valid if valid else 0.0
    return MetricsReport(
        attempts=attempts,
        valid=valid,
        validity=valid / attempts if attempts else 0.0,
        uniqueness=len(unique) / valid if valid else 0.0,
        novelty=len(unique - set(corpus_keys)) / len(unique) if unique else 0.0,
        retention=retention,
    )


def metrics_from_file(path: str | Path, corpus_keys=frozenset(), scaffold: MolGraph | None = None) -> MetricsReport:
    attempts, smiles = read_molecules(path)
    return compute_metrics(smiles, attempts, corpus_keys, scaffold)


def write_json(path: str | Path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


# -- curves --------------------------------------------------------------------


def write_series_csv(path: str | Path, series: dict[str, list[int]]) -> None:
    names = list(series)
    n = max((len(s) for s in series.values()), default=0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["attempt", *names])
        for k in range(n):
            w.writerow([k + 1, *(series[m][k] if k < len(series[m]) else series[m][-1] for m in names)])


def plot_series(path: str | Path, series: dict[str, list[int]], title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5), dpi=120)
    for name, ys in series.items():
        ax.plot(range(1, len(ys) + 1), ys, label=name, linewidth=1.5)
    ax.set_xlabel("attempts")
    ax.set_ylabel("cumulative satisfying molecules")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# -- logic benchmark -----------------------------------------------------------


def boosted_vocabulary(
    corpus: list[MolGraph],
    expr: Expr,
    lib: ScaffoldLibrary,
    like: Vocabulary,
    boost: int = FILTER_BOOST,
    blueprints: list[Blueprint] | None = None,
) -> Vocabulary:
    """Refit the proposal statistics with corpus molecules satisfying ``expr`` counted ``boost`` times."""
    if blueprints is None:
        blueprints, _ = decompose_corpus(corpus, like.tau, like.max_size, like.max_depth)
    extra = [bp for g, bp in zip(corpus, blueprints) if evaluate(expr, g, lib)[0]] * (boost - 1)
    return build_vocabulary(
        corpus, like.k, like.tau, like.max_size, like.max_depth, blueprints + extra, like.stats.smoothing
    )


def unsat_certificate(expr: Expr, vocab: Vocabulary, lib: ScaffoldLibrary, budget: Budget | None = None) -> str:
    """Propositional refutation plus a compiled solver run on an empty proposal."""
    verdict, _ = sat_check(expr)
    tok = vocab[vocab.motif_keys[0]].token()
    bp = Blueprint((tok,), (None,), (None,))
    problem = build_problem(bp)
    lits = {a: problem.new_var(f"atom_{a}", decision=True) for a in atoms_of(expr)}
    problem.branch_first.extend(lits.values())
    compile_to_solver(expr, problem, lits)
    res = solve(problem, budget)
    return f"truth table: {verdict}; compiled solver: {res.status} after {res.nodes} nodes"


@dataclass
class LogicBench:
    constraint: GenerationRun
    baseline: GenerationRun | None
    certificate: str = ""

    def series(self) -> dict[str, list[int]]:
        out = {"constraint_driven": self.constraint.series()}
        if self.baseline is not None:
            out["filter_baseline"] = self.baseline.series()
        return out


def _unsat_run(attempts: int, certificate: str, label: str) -> GenerationRun:
    """Every attempt is refuted by the same certificate; no solver work is repeated."""
    return GenerationRun(label, [Record(i, "UNSAT", satisfied=False, note="refuted") for i in range(attempts)], certificate)


def bench_logic(
    vocab: Vocabulary,
    expr: Expr,
    lib: ScaffoldLibrary,
    attempts: int = DEFAULT_LOGIC_ATTEMPTS,
    seed: int = 0,
    config: GenerateConfig | None = None,
    corpus: list[MolGraph] | None = None,
    threads: int = 1,
    with_baseline: bool = True,
) -> LogicBench:
    config = config or GenerateConfig()
    verdict, _ = sat_check(expr)
    if verdict == "UNSAT":
        # no molecule can pass the filter either, so the baseline is not run
        cert = unsat_certificate(expr, vocab, lib)
        return LogicBench(_unsat_run(attempts, cert, "logic"), None, cert)
    gen = Generator(vocab, config, Task(expr=expr, library=lib))
    cons = run(gen, attempts, seed, threads, "logic")
    base = None
    if with_baseline:
        bvocab = boosted_vocabulary(corpus, expr, lib, vocab) if corpus else vocab
        base = run(_Filter(bvocab, config, expr, lib), attempts, seed, threads, "filter-baseline")
    return LogicBench(cons, base)


class _Filter(Generator):
    """Unconstrained generation followed by an evaluate filter."""

    def __init__(self, vocab, config, expr, lib):
        super().__init__(vocab, config)
        self.expr, self.lib = expr, lib

    def run_one(self, seed: int, index: int):
        rec = super().run_one(seed, index)
        g = checked_graph(rec.smiles) if rec.valid else None
        rec.satisfied = g is not None and evaluate(self.expr, g, self.lib)[0]
        return rec


# -- scaffold benchmark --------------------------------------------------------


def bench_scaffold(
    vocab: Vocabulary,
    scaffold_smiles: str,
    n: int,
    seed: int = 0,
    config: GenerateConfig | None = None,
    threads: int = 1,
) -> tuple[GenerationRun, MetricsReport]:
    scaffold = parse_smiles(scaffold_smiles)
    gen = Generator(vocab, config or GenerateConfig(), Task(forced=(("scaffold", scaffold_smiles),)))
    run_ = run(gen, n, seed, threads, "scaffold")
    report = compute_metrics([r.smiles for r in run_.records if r.smiles], n, vocab.corpus_keys, scaffold)
    return run_, report
