"""Propositional constraints over scaffold-presence atoms.

Surface syntax: atom names, ``!`` (or ``~``), ``&``, ``|``, parentheses and
the macros ``IMP(a, b)``, ``XOR2(a, b)`` and ``IFF(a, b)``, which are
expanded while parsing::

    IMP(a, b)  = !a | b
    XOR2(a, b) = (a | b) & !(a & b)
    IFF(a, b)  = IMP(a, b) & IMP(b, a)

Constraint files (``.lc``) hold an optional ``[library]`` section of
``NAME = SMILES`` lines followed by a ``[formula]`` section.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

from .molgraph import MolGraph, find_substructure, parse_smiles, validate_valence

MAX_SAT_ATOMS = 24


class LogicError(ValueError):
    pass


class ExprSyntaxError(LogicError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        super().__init__(f"{message} at position {pos}" + (f" in {text!r}" if text else ""))


class UnknownAtom(LogicError):
    pass


class UnknownMacro(LogicError):
    pass


class TooManyAtoms(LogicError):
    pass


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class And:
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Expr", ...]


Expr = Union[Atom, Not, And, Or]


def IMP(a: Expr, b: Expr) -> Expr:
    return Or((Not(a), b))


def XOR2(a: Expr, b: Expr) -> Expr:
    return And((Or((a, b)), Not(And((a, b)))))


def IFF(a: Expr, b: Expr) -> Expr:
    return And((IMP(a, b), IMP(b, a)))


MACROS = {"IMP": IMP, "XOR2": XOR2, "IFF": IFF}

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[!~&|(),¬∧∨]))")
_OP_ALIASES = {"~": "!", "¬": "!", "∧": "&", "∨": "|"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start("name") if m.group("name") else m.start("op")
        if m.group("name"):
            out.append(("name", m.group("name"), start))
        else:
            op = m.group("op")
            out.append(("op", _OP_ALIASES.get(op, op), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, atoms: Iterable[str] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0
        self.atoms = set(atoms) if atoms is not None else None

    def peek(self):
        return self.toks[self.k]

    def take(self, value: str | None = None):
        kind, val, pos = self.toks[self.k]
        if value is not None and val != value:
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r} but found {what}", pos, self.text)
        self.k += 1
        return kind, val, pos

    def parse(self) -> Expr:
        e = self.disj()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos, self.text)
        return e

    def disj(self) -> Expr:
        args = [self.conj()]
        while self.peek()[1] == "|" and self.peek()[0] == "op":
            self.take()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self) -> Expr:
        args = [self.unary()]
        while self.peek()[1] == "&" and self.peek()[0] == "op":
            self.take()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "op" and val == "!":
            self.take()
            return Not(self.unary())
        if kind == "op" and val == "(":
            self.take()
            e = self.disj()
            self.take(")")
            return e
        if kind == "name":
            self.take()
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in MACROS:
                    raise UnknownMacro(f"unknown macro {val!r} at position {pos}")
                self.take("(")
                a = self.disj()
                self.take(",")
                b = self.disj()
                self.take(")")
                return MACROS[val](a, b)
            if self.atoms is not None and val not in self.atoms:
                raise UnknownAtom(f"unknown atom {val!r} at position {pos}")
            return Atom(val)
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", pos, self.text)


def parse_expr(text: str, atoms: Iterable[str] | None = None) -> Expr:
    """Parse a formula; when ``atoms`` is given every atom must be in it."""
    return _Parser(text, atoms).parse()


def atoms_of(e: Expr) -> list[str]:
    out: list[str] = []

    def walk(x):
        if isinstance(x, Atom):
            if x.name not in out:
                out.append(x.name)
        elif isinstance(x, Not):
            walk(x.arg)
        else:
            for a in x.args:
                walk(a)

    walk(e)
    return sorted(out)


def eval_assignment(e: Expr, values: dict[str, bool]) -> bool:
    if isinstance(e, Atom):
        return bool(values[e.name])
    if isinstance(e, Not):
        return not eval_assignment(e.arg, values)
    if isinstance(e, And):
        return all(eval_assignment(a, values) for a in e.args)
    return any(eval_assignment(a, values) for a in e.args)


def to_text(e: Expr) -> str:
    if isinstance(e, Atom):
        return e.name
    if isinstance(e, Not):
        return "!" + to_text(e.arg)
    sep = " & " if isinstance(e, And) else " | "
    return "(" + sep.join(to_text(a) for a in e.args) + ")"


# -- scaffold library --------------------------------------------------------


@dataclass(frozen=True)
class Scaffold:
    symbol: str
    name: str
    smiles: str
    graph: MolGraph


class ScaffoldLibrary:
    def __init__(self, entries: Iterable[Scaffold] = ()):
        self.entries: dict[str, Scaffold] = {}
        for s in entries:
            self.add(s)

    def add(self, s: Scaffold) -> None:
        if s.graph.n_atoms == 0:
            raise LogicError(f"scaffold {s.symbol} is empty")
        if not validate_valence(s.graph).ok:
            raise LogicError(f"scaffold {s.symbol} violates valence")
        self.entries[s.symbol] = s

    @classmethod
    def from_smiles(cls, mapping: dict[str, str], names: dict[str, str] | None = None) -> "ScaffoldLibrary":
        names = names or {}
        return cls(Scaffold(k, names.get(k, k), v, parse_smiles(v)) for k, v in mapping.items())

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def __getitem__(self, key: str) -> MolGraph:
        return self.lookup(key).graph

    def symbols(self) -> list[str]:
        return sorted(self.entries)

    def atom_names(self) -> list[str]:
        """Symbols plus long names; both resolve through :meth:`lookup`."""
        return self.symbols() + sorted(s.name for s in self.entries.values())

    def lookup(self, key: str) -> Scaffold:
        if key in self.entries:
            return self.entries[key]
        for s in self.entries.values():
            if s.name.lower() == key.lower():
                return s
        raise UnknownAtom(f"no scaffold named {key!r}")


DEFAULT_SCAFFOLDS = (
    ("P", "Pyridine", "C1=CC=NC=C1"),
    ("Q", "Pyrimidine", "C1=CN=CN=C1"),
    ("I", "Imidazole", "C1=CN=CN1"),
    ("H", "Thiazole", "C1=CSC=N1"),
    ("N", "Nitrile", "C#N"),
    ("F", "Trifluoromethyl", "C(F)(F)F"),
    ("A", "Amide", "C(=O)N"),
    ("S", "Sulfonamide", "S(=O)(=O)N"),
    ("T", "tert-Butyl", "CC(C)(C)C"),
)


def default_library() -> ScaffoldLibrary:
    return ScaffoldLibrary(Scaffold(sym, name, smi, parse_smiles(smi)) for sym, name, smi in DEFAULT_SCAFFOLDS)


BENCHMARKS = {
    "phi1": "XOR2(P,Q) & XOR2(N,F) & XOR2(A,S) & IMP(P, N | (F & T)) & IMP(Q, F | (N & A)) "
    "& IMP(T,S) & IMP(A,!T)",
    "phi2": "XOR2(I,H) & XOR2(A,S) & IFF(T,S) & IMP(A,N) & IMP(H, A & !T) & IMP(I, S | N)",
    "phi3": "(P & Q & H) & XOR2(N,F) & XOR2(A,S) & IFF(A,N) & IFF(S,F)",
    "phi_unsat": "XOR2(P,Q) & XOR2(Q,I) & XOR2(P,I)",
}


def builtin_benchmarks() -> dict[str, Expr]:
    atoms = [s for s, _, _ in DEFAULT_SCAFFOLDS]
    return {k: parse_expr(v, atoms) for k, v in BENCHMARKS.items()}


# -- semantics -----------------------------------------------------------------


def assignment(m: MolGraph, lib: ScaffoldLibrary, names: Iterable[str]) -> dict[str, bool]:
    return {n: find_substructure(m, lib[n])[0] for n in names}


def evaluate(e: Expr, m: MolGraph, lib: ScaffoldLibrary) -> tuple[bool, dict[str, bool]]:
    """Truth of ``e`` on molecule ``m`` plus the per-atom presence map."""
    values = assignment(m, lib, atoms_of(e))
    return eval_assignment(e, values), values


def models(e: Expr) -> list[dict[str, bool]]:
    names = atoms_of(e)
    if len(names) > MAX_SAT_ATOMS:
        raise TooManyAtoms(f"{len(names)} atoms exceed the exhaustive limit {MAX_SAT_ATOMS}")
    out = []
    for bits in itertools.product((False, True), repeat=len(names)):
        v = dict(zip(names, bits))
        if eval_assignment(e, v):
            out.append(v)
    return out


def sat_check(e: Expr) -> tuple[str, dict[str, bool] | None]:
    """Exhaustive truth-table verdict ``("SAT", model)`` or ``("UNSAT", None)``."""
    names = atoms_of(e)
    if len(names) > MAX_SAT_ATOMS:
        raise TooManyAtoms(f"{len(names)} atoms exceed the exhaustive limit {MAX_SAT_ATOMS}")
    for bits in itertools.product((False, True), repeat=len(names)):
        v = dict(zip(names, bits))
        if eval_assignment(e, v):
            return "SAT", v
    return "UNSAT", None


def compile_to_solver(e: Expr, problem, atom_lits: dict[str, int]) -> int:
    """Tseitin-encode ``e`` over ``atom_lits`` into ``problem`` and assert it.

    Returns the literal of the root of the formula.
    """
    counter = itertools.count()

    def enc(x) -> int:
        if isinstance(x, Atom):
            if x.name not in atom_lits:
                raise UnknownAtom(f"atom {x.name!r} has no solver literal")
            return atom_lits[x.name]
        if isinstance(x, Not):
            return -enc(x.arg)
        ins = [enc(a) for a in x.args]
        op = "and" if isinstance(x, And) else "or"
        return problem.gate(f"logic_{op}_{next(counter)}", op, ins)

    root = enc(e)
    problem.add_clause((root,))
    return root


# -- constraint files ----------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    expr: Expr
    library: ScaffoldLibrary
    text: str


def parse_constraint(text: str) -> Constraint:
    section = None
    lib_lines: dict[str, str] = {}
    names: dict[str, str] = {}
    formula: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower() in ("[library]", "[formula]"):
            section = line.lower()[1:-1]
            continue
        if section == "library":
            if "=" not in line:
                raise LogicError(f"line {lineno}: expected NAME = SMILES")
            key, smi = (p.strip() for p in line.split("=", 1))
            parts = key.split()
            sym = parts[0]
            if len(parts) > 1:
                names[sym] = " ".join(parts[1:])
            lib_lines[sym] = smi
        elif section == "formula" or section is None:
            formula.append(line)
    if not formula:
        raise LogicError("constraint file has no formula")
    lib = default_library()
    if lib_lines:
        custom = ScaffoldLibrary.from_smiles(lib_lines, names)
        for s in custom.entries.values():
            lib.add(s)
    body = " ".join(formula)
    return Constraint(parse_expr(body, lib.symbols()), lib, body)


def load_constraint(path: str | Path) -> Constraint:
    return parse_constraint(Path(path).read_text())
