"""Command-line entry point ``nsggm``.

Exit codes: 0 success, 1 when every attempt of a run was UNSAT (or a
``check`` verdict is negative), 2 for usage, input or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .assemble import Budget, ScaffoldNotRealizable, Weights
from .bench import (
    DEFAULT_LOGIC_ATTEMPTS,
    bench_logic,
    bench_scaffold,
    compute_metrics,
    plot_series,
    write_json,
    write_molecules,
    write_series_csv,
    write_trace,
)
from .decompose import NegativeResidual, decompose_corpus, write_blueprint
from .generate import DEFAULT_NODES, GenerateConfig, Generator, run
from .logic import BENCHMARKS, LogicError, ScaffoldLibrary, default_library, evaluate, load_constraint, parse_expr
from .molgraph import SmilesError, parse_smiles, read_corpus, write_smiles
from .propose import ProposalParseError, load_external_proposals
from .vocab import DEFAULT_SMOOTHING, EmptyCorpus, IoFailure, SchemaVersionMismatch, Vocabulary, build_vocabulary, load_vocab, save_vocab

log = logging.getLogger("nsggm")

# settings a --config JSON file may override; explicit flags win over both
CONFIG_KEYS = {
    "seed": 0,
    "threads": 1,
    "backend": "builtin",
    "weights": "10,1,5",
    "budget_ms": 5000,
    "budget_nodes": DEFAULT_NODES,
    "temperature": 1.0,
    "max_len": 12,
}


class UsageError(Exception):
    pass


def shipped(name: str) -> Path:
    return Path(str(resources.files("nsggm") / "data" / name))


def _load_corpus(path: str | None):
    p = Path(path) if path else shipped("corpus.smi")
    if not p.exists():
        raise UsageError(f"corpus file not found: {p}")
    return [parse_smiles(s) for s in read_corpus(p)]


def _settings(args) -> dict:
    merged = dict(CONFIG_KEYS)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(data)
    for k in CONFIG_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return merged


def _config(args, mode: str = "full") -> tuple[GenerateConfig, dict]:
    s = _settings(args)
    try:
        cfg = GenerateConfig(
            mode=mode,
            weights=Weights.parse(str(s["weights"])),
            budget=Budget(time_ms=float(s["budget_ms"]), nodes=int(s["budget_nodes"])),
            temperature=float(s["temperature"]),
            max_len=int(s["max_len"]),
            backend=str(s["backend"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg, s


def _vocab(args) -> Vocabulary:
    if getattr(args, "vocab", None):
        return load_vocab(args.vocab)
    return build_vocabulary(_load_corpus(getattr(args, "corpus", None)))


# -- verbs -----------------------------------------------------------------------


def cmd_decompose(args) -> int:
    graphs = _load_corpus(args.corpus)
    bps, _ = decompose_corpus(graphs, args.tau)
    text = "".join(write_blueprint(bp, f"mol{k}") for k, bp in enumerate(bps))
    _write(args.out, text)
    print(f"{len(bps)} blueprints, {sum(len(b.tokens) for b in bps)} tokens", file=sys.stderr)
    return 0


def cmd_vocab(args) -> int:
    graphs = _load_corpus(args.corpus)
    v = build_vocabulary(graphs, k=args.k, tau=args.tau, smoothing=args.smoothing)
    save_vocab(v, args.out)
    print(f"{'motif':<24} {'kind':<6} {'freq':>5} {'variants':>8}")
    for key in sorted(v.entries, key=lambda k: (-v.entries[k].frequency, k)):
        e = v.entries[key]
        print(f"{write_smiles(e.exemplar):<24} {e.kind:<6} {e.frequency:>5} {len(e.variants):>8}")
    return 0


def cmd_generate(args) -> int:
    mode = "no-solver" if args.no_solver else "no-guidance" if args.no_guidance else "full"
    cfg, s = _config(args, mode)
    vocab = _vocab(args)
    proposals = load_external_proposals(args.proposals, vocab) if args.proposals else None
    n = len(proposals) if proposals is not None else args.n
    gen = Generator(vocab, cfg, proposals=proposals)
    result = run(gen, n, s["seed"], s["threads"])
    out = Path(args.out)
    write_molecules(out, result, seed=s["seed"])
    report = compute_metrics([r.smiles for r in result.records if r.smiles], n, vocab.corpus_keys)
    side = {"mode": mode, "counts": result.counts(), "metrics": report.to_json()}
    write_json(out.with_suffix(".metrics.json"), side)
    write_trace(out.with_suffix(".trace.tsv"), result)
    _print_report(report, result.counts())
    return _exit_for(result.counts())


def _parse_formula(text: str):
    """A builtin benchmark name, a ``.lc`` file, or an inline formula."""
    if text in BENCHMARKS:
        lib = default_library()
        return parse_expr(BENCHMARKS[text], lib.symbols()), lib
    p = Path(text)
    if p.suffix == ".lc":
        if not p.exists():
            raise UsageError(f"constraint file not found: {p}")
        c = load_constraint(p)
        return c.expr, c.library
    lib = default_library()
    return parse_expr(text, lib.atom_names()), lib


def cmd_bench_logic(args) -> int:
    cfg, s = _config(args)
    expr, lib = _parse_formula(args.formula)
    corpus = _load_corpus(args.corpus)
    vocab = load_vocab(args.vocab) if args.vocab else build_vocabulary(corpus)
    res = bench_logic(
        vocab, expr, lib, args.attempts, s["seed"], cfg, corpus, s["threads"], with_baseline=not args.no_baseline
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series = res.series()
    write_series_csv(out / "series.csv", series)
    plot_series(out / "series.png", series, f"{args.formula}")
    summary = {
        "formula": args.formula,
        "attempts": args.attempts,
        "seed": s["seed"],
        "certificate": res.certificate,
        "constraint_driven": {"counts": res.constraint.counts(), "satisfiers": len(res.constraint.satisfiers())},
    }
    if res.baseline is not None:
        summary["filter_baseline"] = {"counts": res.baseline.counts(), "satisfiers": len(res.baseline.satisfiers())}
    write_json(out / "summary.json", summary)
    write_trace(out / "trace_constraint.tsv", res.constraint)
    if res.baseline is not None:
        write_trace(out / "trace_baseline.tsv", res.baseline)
    (out / "satisfiers.smi").write_text("".join(r.smiles + "\n" for r in res.constraint.satisfiers()))
    if res.certificate:
        log.warning("UNSAT certificate: %s", res.certificate)
    for name, ys in series.items():
        print(f"{name}: {ys[-1] if ys else 0} satisfiers in {len(ys)} attempts")
    return _exit_for(res.constraint.counts())


def cmd_bench_scaffold(args) -> int:
    cfg, s = _config(args)
    parse_smiles(args.scaffold)  # fail early on a bad scaffold string
    vocab = _vocab(args)
    result, report = bench_scaffold(vocab, args.scaffold, args.n, s["seed"], cfg, s["threads"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_molecules(out / "molecules.smi", result, seed=s["seed"], scaffold=args.scaffold)
    write_json(out / "metrics.json", {"counts": result.counts(), "metrics": report.to_json()})
    write_trace(out / "trace.tsv", result)
    _print_report(report, result.counts())
    return _exit_for(result.counts())


def cmd_check(args) -> int:
    mol = parse_smiles(args.molecule)
    if args.scaffold:
        lib = ScaffoldLibrary.from_smiles({"X": args.scaffold})
        expr = parse_expr("X")
    elif args.constraint:
        expr, lib = _parse_formula(args.constraint)
    else:
        raise UsageError("check needs --constraint or --scaffold")
    verdict, values = evaluate(expr, mol, lib)
    for name in sorted(values):
        print(f"{name}\t{'present' if values[name] else 'absent'}")
    print("satisfied" if verdict else "unsatisfied")
    return 0 if verdict else 1


# -- plumbing --------------------------------------------------------------------


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _print_report(report, counts: dict) -> None:
    print(
        f"attempts={counts['attempts']} sat={counts['sat']} unsat={counts['unsat']} "
        f"timeouts={counts['timeouts']} unchecked={counts['unchecked']}"
    )
    line = f"validity={report.validity:.4f} uniqueness={report.uniqueness:.4f} novelty={report.novelty:.4f}"
    if report.retention is not None:
        line += f" retention={report.retention:.4f}"
    print(line)


def _exit_for(counts: dict) -> int:
    return 1 if counts["attempts"] and counts["unsat"] == counts["attempts"] else 0


def _globals(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    g.add_argument("--threads", type=int, default=None, help="worker processes for attempts (default 1)")
    g.add_argument("--backend", default=None, help="'builtin' or 'external:<solver binary>'")
    g.add_argument("--weights", default=None, help="soft weights w_reach,w_conn,w_parent (default 10,1,5)")
    g.add_argument("--budget-ms", dest="budget_ms", type=float, default=None, help="solver time limit per attempt")
    g.add_argument("--budget-nodes", dest="budget_nodes", type=int, default=None, help="solver node limit per attempt")
    g.add_argument("--temperature", type=float, default=None)
    g.add_argument("--max-len", dest="max_len", type=int, default=None)
    g.add_argument("--config", default=None, help="JSON file overriding defaults")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nsggm", description="Motif proposal plus constraint-solving molecule assembly.")
    ap.add_argument("--version", action="version", version=f"nsggm {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("decompose", help="write blueprints for a SMILES corpus")
    p.add_argument("corpus")
    p.add_argument("-o", "--out", default="-")
    p.add_argument("--tau", type=int, default=2)
    _globals(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("vocab", help="build and save a motif vocabulary")
    p.add_argument("corpus")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("-k", type=int, default=8, help="variants kept per motif")
    p.add_argument("--tau", type=int, default=2)
    p.add_argument("--smoothing", type=float, default=DEFAULT_SMOOTHING, help="additive smoothing constant")
    _globals(p)
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("generate", help="generate molecules")
    p.add_argument("--vocab")
    p.add_argument("--corpus", help="build the vocabulary from this corpus (default: shipped corpus)")
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("-o", "--out", required=True, help="molecule file; metrics go next to it")
    p.add_argument("--proposals", help="JSON-lines proposal file replacing the sampler")
    m = p.add_mutually_exclusive_group()
    m.add_argument("--no-guidance", action="store_true", help="uniform variants, no parent rewards")
    m.add_argument("--no-solver", action="store_true", help="greedy merges without constraint search")
    _globals(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench-logic", help="constraint-driven vs generate-and-filter on a formula")
    p.add_argument("--formula", required=True, help="phi1|phi2|phi3|phi_unsat, a .lc file, or an inline formula")
    p.add_argument("--vocab")
    p.add_argument("--corpus", help="corpus for the vocabulary and the filter baseline")
    p.add_argument("--attempts", type=int, default=DEFAULT_LOGIC_ATTEMPTS)
    p.add_argument("--no-baseline", action="store_true")
    p.add_argument("-o", "--out", required=True, help="output directory")
    _globals(p)
    p.set_defaults(func=cmd_bench_logic)

    p = sub.add_parser("bench-scaffold", help="scaffold-constrained generation")
    p.add_argument("--scaffold", required=True, help="scaffold SMILES")
    p.add_argument("--vocab")
    p.add_argument("--corpus")
    p.add_argument("-n", type=int, default=100)
    p.add_argument("-o", "--out", required=True, help="output directory")
    _globals(p)
    p.set_defaults(func=cmd_bench_scaffold)

    p = sub.add_parser("check", help="evaluate a molecule against a constraint or scaffold")
    p.add_argument("--molecule", required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--constraint", help="phi1|phi2|phi3|phi_unsat, a .lc file, or an inline formula")
    grp.add_argument("--scaffold", help="scaffold SMILES")
    _globals(p)
    p.set_defaults(func=cmd_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (
        UsageError,
        SmilesError,
        LogicError,
        ProposalParseError,
        SchemaVersionMismatch,
        EmptyCorpus,
        NegativeResidual,
        ScaffoldNotRealizable,
        FileNotFoundError,
        IoFailure,
    ) as exc:
        print(f"nsggm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
