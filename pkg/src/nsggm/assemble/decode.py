"""Turning a model into a molecule, and checking the result independently."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..decompose import Blueprint
from ..molgraph import MolGraph, validate_valence
from .problem import AssemblyProblem, SolverResult


class SoundnessViolation(RuntimeError):
    def __init__(self, report: "SoundnessReport"):
        self.report = report
        super().__init__("; ".join(f"{f}: {d}" for f, d in report.failures))


@dataclass(frozen=True)
class Assembly:
    """Solver-independent description of which merges were selected."""

    identify: tuple[tuple[int, int, int, int], ...]
    bonds: tuple[tuple[int, int, int, int, int], ...]
    tokens: tuple[int, ...]  # tokens kept in the output (the root's component)
    root: int | None = None


@dataclass
class SoundnessReport:
    failures: list[tuple[str, str]] = field(default_factory=list)
    checked: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, family: str, detail: str) -> None:
        self.failures.append((family, detail))

    def families(self) -> set[str]:
        return {f for f, _ in self.failures}


def assembly_from_model(problem: AssemblyProblem, res: SolverResult) -> Assembly:
    vals = res.values
    if vals is None:
        raise ValueError("no model to decode")
    kept = tuple(i for i, r in enumerate(problem.reach) if vals[r])
    root = next((i for i, r in enumerate(problem.roots) if vals[r]), None)
    keep = set(kept)
    ident = tuple((m.ti, m.a, m.tj, m.b) for m in problem.identify if vals[m.var] and m.ti in keep)
    bonds = tuple((m.ti, m.a, m.tj, m.b, m.order) for m in problem.bonds if vals[m.var] and m.ti in keep)
    return Assembly(ident, bonds, kept, root)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass
class Decoded:
    graph: MolGraph
    atom_of: dict[tuple[int, int], int]  # (token, local atom) -> output atom
    issues: list[tuple[str, str]]


def _build(bp: Blueprint, asm: Assembly) -> Decoded:
    tokens = bp.tokens
    keep = sorted(set(asm.tokens))
    uf = _UnionFind()
    issues: list[tuple[str, str]] = []
    for t in keep:
        for a in range(tokens[t].graph.n_atoms):
            uf.find((t, a))
    for ti, a, tj, b in asm.identify:
        if ti not in asm.tokens or tj not in asm.tokens:
            issues.append(("reachability", f"merge ({ti},{a})~({tj},{b}) touches a dropped token"))
            continue
        uf.union((ti, a), (tj, b))
    classes: dict = {}
    for t in keep:
        for a in range(tokens[t].graph.n_atoms):
            classes.setdefault(uf.find((t, a)), []).append((t, a))
    reps = sorted(classes)
    index = {r: k for k, r in enumerate(reps)}
    atom_of = {m: index[uf.find(m)] for m in uf.parent if m[0] in set(keep)}
    elements = []
    for r in reps:
        els = {tokens[t].graph.elements[a] for t, a in classes[r]}
        if len(els) != 1:
            issues.append(("element", f"class {classes[r]} mixes {sorted(els)}"))
        members = classes[r]
        if len({t for t, _ in members}) != len(members):
            issues.append(("integrity", f"class {members} holds two atoms of one token"))
        elements.append(tokens[members[0][0]].graph.elements[members[0][1]])
    bonds: dict[tuple[int, int], int] = {}
    for t in keep:
        for i, j, o in tokens[t].graph.bonds:
            u, v = atom_of[(t, i)], atom_of[(t, j)]
            if u == v:
                issues.append(("simple-graph", f"token {t} bond ({i},{j}) collapses to a loop"))
                continue
            key = (min(u, v), max(u, v))
            if key in bonds and bonds[key] != o:
                issues.append(("edge-order", f"shared bond {key} has orders {bonds[key]} and {o}"))
                bonds[key] = max(bonds[key], o)
            else:
                bonds[key] = o
    for ti, a, tj, b, o in asm.bonds:
        if ti not in asm.tokens or tj not in asm.tokens:
            issues.append(("reachability", f"new bond ({ti},{a})-({tj},{b}) touches a dropped token"))
            continue
        u, v = atom_of[(ti, a)], atom_of[(tj, b)]
        if u == v:
            issues.append(("simple-graph", f"new bond ({ti},{a})-({tj},{b}) is a loop"))
            continue
        key = (min(u, v), max(u, v))
        if key in bonds:
            issues.append(("simple-graph", f"new bond {key} duplicates an existing bond"))
            continue
        bonds[key] = o
    g = MolGraph(tuple(elements), tuple((u, v, o) for (u, v), o in sorted(bonds.items())))
    return Decoded(g, atom_of, issues)


def decode_graph(bp: Blueprint, asm: Assembly | tuple[AssemblyProblem, SolverResult], strict: bool = True) -> MolGraph:
    """Quotient the kept tokens by the selected identifications and add new bonds.

    With ``strict`` any structural problem raises :class:`SoundnessViolation`;
    otherwise the best-effort graph is returned (used by the no-solver ablation).
    """
    if not isinstance(asm, Assembly):
        asm = assembly_from_model(*asm)
    dec = _build(bp, asm)
    if strict:
        report = verify_soundness(bp, asm, dec.graph)
        if not report.ok:
            raise SoundnessViolation(report)
    return dec.graph


def verify_soundness(bp: Blueprint, asm: Assembly, decoded: MolGraph) -> SoundnessReport:
    """Recheck a decode from scratch; failures name the violated family."""
    rep = SoundnessReport()
    tokens = bp.tokens
    rep.checked += ["integrity", "element", "edge-order", "simple-graph", "embedding", "valence"]
    for ti, a, tj, b in asm.identify:
        if ti == tj:
            rep.fail("integrity", f"merge inside token {ti}: atoms {a} and {b}")
        if tokens[ti].graph.elements[a] != tokens[tj].graph.elements[b]:
            rep.fail(
                "element",
                f"({ti},{a}) {tokens[ti].graph.elements[a]} merged with ({tj},{b}) {tokens[tj].graph.elements[b]}",
            )
    dec = _build(bp, asm)
    for fam, detail in dec.issues:
        if (fam, detail) not in rep.failures:
            rep.fail(fam, detail)
    if dec.graph != decoded:
        rep.fail("embedding", "decoded graph differs from the reconstruction")
    # each kept token embeds injectively with its bonds and orders intact
    for t in sorted(set(asm.tokens)):
        g = tokens[t].graph
        images = [dec.atom_of[(t, a)] for a in range(g.n_atoms)]
        if len(set(images)) != len(images):
            rep.fail("embedding", f"token {t} is not embedded injectively")
        for i, j, o in g.bonds:
            if images[i] != images[j] and dec.graph.bond_order(images[i], images[j]) != o:
                rep.fail("embedding", f"token {t} bond ({i},{j}) lost its order")
    if decoded.n_atoms and not decoded.is_connected():
        rep.fail("connectivity", "decoded graph is disconnected")
    vr = validate_valence(decoded)
    for a in vr.failures:
        rep.fail("valence", f"atom {a.index} {a.element} has bond sum {a.bond_sum} > {a.cap}")
    return rep
