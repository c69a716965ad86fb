"""Restricted SMILES reader and writer.

Grammar (Kekulé form only)::

    smiles  := chain ('.' chain)*
    chain   := atom (bond? (atom | ring) | '(' bond? chain ')')*
    atom    := organic | '[' symbol ('H' digit?)? ']'
    organic := B C N O P S F Cl Br I
    bond    := '-' | '=' | '#'
    ring    := digit | '%' digit digit

Lowercase aromatic atoms, charges, isotopes, stereo marks and chirality are
rejected.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Iterator

from .elements import ORGANIC_SUBSET, element_table, get_element
from .graph import MolGraph


class SmilesError(ValueError):
    pass


class UnknownElement(SmilesError):
    pass


class RingBondUnclosed(SmilesError):
    pass


class ValenceExceeded(SmilesError):
    pass


class EmptyInput(SmilesError):
    pass


_BOND_CHARS = {"-": 1, "=": 2, "#": 3}
_BOND_SYMBOL = {1: "", 2: "=", 3: "#"}


def parse_smiles(text: str) -> MolGraph:
    s = text.strip()
    if not s:
        raise EmptyInput("empty SMILES")
    elements: list[str] = []
    hcounts: list[int | None] = []
    bonds: dict[tuple[int, int], int] = {}
    rings: dict[int, tuple[int, int | None]] = {}
    stack: list[int] = []
    prev: int | None = None
    pending: int | None = None
    i, n = 0, len(s)

    def add_bond(a: int, b: int, order: int, pos: int):
        key = (a, b) if a < b else (b, a)
        if a == b or key in bonds:
            raise SmilesError(f"invalid ring closure at position {pos}")
        bonds[key] = order

    while i < n:
        c = s[i]
        if c == "(":
            if prev is None:
                raise SmilesError(f"branch without an atom at position {i}")
            stack.append(prev)
            i += 1
        elif c == ")":
            if not stack:
                raise SmilesError(f"unbalanced ')' at position {i}")
            if pending is not None:
                raise SmilesError(f"dangling bond at position {i}")
            prev = stack.pop()
            i += 1
        elif c in _BOND_CHARS:
            if pending is not None or prev is None:
                raise SmilesError(f"unexpected bond symbol at position {i}")
            pending = _BOND_CHARS[c]
            i += 1
        elif c == ".":
            if pending is not None or stack:
                raise SmilesError(f"unexpected '.' at position {i}")
            prev = None
            i += 1
        elif c.isdigit() or c == "%":
            if prev is None:
                raise SmilesError(f"ring digit without an atom at position {i}")
            if c == "%":
                if i + 2 >= n or not s[i + 1 : i + 3].isdigit():
                    raise SmilesError(f"malformed %nn ring label at position {i}")
                label = int(s[i + 1 : i + 3])
                i += 3
            else:
                label = int(c)
                i += 1
            if label in rings:
                other, order = rings.pop(label)
                if order is not None and pending is not None and order != pending:
                    raise SmilesError(f"conflicting ring bond orders for label {label}")
                add_bond(other, prev, pending or order or 1, i)
            else:
                rings[label] = (prev, pending)
            pending = None
        elif c == "[":
            j = s.find("]", i)
            if j < 0:
                raise SmilesError(f"unclosed bracket atom at position {i}")
            sym, h = _parse_bracket(s[i + 1 : j], i)
            elements.append(sym)
            hcounts.append(h)
            idx = len(elements) - 1
            if prev is not None:
                add_bond(prev, idx, pending or 1, i)
            pending = None
            prev = idx
            i = j + 1
        elif c.isalpha():
            sym = s[i : i + 2] if s[i : i + 2] in ("Cl", "Br") else c
            if sym not in ORGANIC_SUBSET:
                if c.islower():
                    raise UnknownElement(
                        f"aromatic or unknown atom {c!r} at position {i}; use Kekulé form"
                    )
                raise UnknownElement(f"unsupported atom {sym!r} at position {i}")
            get_element(sym)
            elements.append(sym)
            hcounts.append(None)
            idx = len(elements) - 1
            if prev is not None:
                add_bond(prev, idx, pending or 1, i)
            pending = None
            prev = idx
            i += len(sym)
        else:
            raise SmilesError(f"unexpected character {c!r} at position {i}")
    if rings:
        raise RingBondUnclosed(f"unclosed ring bond(s) {sorted(rings)}")
    if stack:
        raise SmilesError("unbalanced '('")
    if pending is not None:
        raise SmilesError("dangling bond at end of input")
    g = MolGraph(tuple(elements), tuple((a, b, o) for (a, b), o in bonds.items()), tuple(hcounts))
    for k, sym in enumerate(g.elements):
        used = g.bond_sum(k) + (g.explicit_h[k] or 0)
        if used > get_element(sym).cap:
            raise ValenceExceeded(f"atom {k} ({sym}) has valence {used} > {get_element(sym).cap}")
    return g


def _parse_bracket(body: str, pos: int) -> tuple[str, int]:
    if not body:
        raise SmilesError(f"empty bracket atom at position {pos}")
    if any(ch in body for ch in "+-@:") or body[0].isdigit():
        raise SmilesError(f"charges, isotopes, stereo and maps unsupported: [{body}]")
    if body[:2] in element_table() and len(body) >= 2 and body[1].islower():
        sym, rest = body[:2], body[2:]
    else:
        sym, rest = body[0], body[1:]
    if sym not in element_table():
        raise UnknownElement(f"unsupported atom {sym!r} at position {pos}")
    if not rest:
        return sym, 0
    if rest[0] != "H":
        raise SmilesError(f"malformed bracket atom [{body}]")
    digits = rest[1:]
    if digits and not digits.isdigit():
        raise SmilesError(f"malformed bracket atom [{body}]")
    return sym, int(digits) if digits else 1


def write_smiles(g: MolGraph) -> str:
    """Write a SMILES string; components are joined with '.'."""
    if g.n_atoms == 0:
        return ""
    parts = []
    for comp in g.components():
        parts.append(_write_component(g, comp[0]))
    return ".".join(parts)


def _atom_text(g: MolGraph, i: int) -> str:
    sym = g.elements[i]
    h = g.explicit_h[i]
    if h is None and sym in ORGANIC_SUBSET:
        return sym
    if h is None:
        h = g.implicit_h(i)
    hpart = "" if h == 0 else ("H" if h == 1 else f"H{h}")
    return f"[{sym}{hpart}]"


def _write_component(g: MolGraph, start: int) -> str:
    # DFS spanning tree; non-tree edges become ring closures.
    parent = {start: None}
    order = []
    children: dict[int, list[int]] = {}
    stack = [start]
    visited = set()
    while stack:
        v = stack.pop()
        if v in visited:
            continue
        visited.add(v)
        order.append(v)
        kids = [u for u, _ in g.neighbors(v) if u not in visited]
        for u in reversed(kids):
            if u not in visited:
                parent[u] = v
                stack.append(u)
    tree_edges = set()
    for v, p in parent.items():
        if p is not None:
            tree_edges.add((min(v, p), max(v, p)))
    # children in DFS visitation order
    pos = {v: k for k, v in enumerate(order)}
    for v in order:
        children[v] = sorted(
            (u for u, _ in g.neighbors(v) if parent.get(u) == v and (min(u, v), max(u, v)) in tree_edges),
            key=pos.__getitem__,
        )
    closures: dict[int, list[tuple[int, int]]] = {v: [] for v in order}
    for i, j, o in g.bonds:
        if i in pos and (i, j) not in tree_edges:
            a, b = (i, j) if pos[i] < pos[j] else (j, i)
            closures[a].append((b, o))
            closures[b].append((a, o))
    free = list(range(1, 100))
    open_labels: dict[tuple[int, int], int] = {}

    def label_text(k: int) -> str:
        return str(k) if k < 10 else f"%{k:02d}"

    def emit(v: int) -> str:
        out = [_atom_text(g, v)]
        for u, o in sorted(closures[v], key=lambda t: pos[t[0]]):
            key = (min(u, v), max(u, v))
            if key in open_labels:
                k = open_labels.pop(key)
                out.append(_BOND_SYMBOL[o] + label_text(k))
                free.append(k)
                free.sort()
            else:
                k = free.pop(0)
                open_labels[key] = k
                out.append(_BOND_SYMBOL[o] + label_text(k))
        kids = children[v]
        for idx, u in enumerate(kids):
            text = _BOND_SYMBOL[g.bond_order(u, v)] + emit(u)
            out.append(text if idx == len(kids) - 1 else f"({text})")
        return "".join(out)

    if len(order) + 50 > sys.getrecursionlimit():
        sys.setrecursionlimit(len(order) + 100)
    return emit(start)


def read_corpus(path: str | Path) -> list[str]:
    """One SMILES per line; blank lines and lines starting with '#' are skipped."""
    return list(iter_corpus_lines(Path(path).read_text().splitlines()))


def iter_corpus_lines(lines) -> Iterator[str]:
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#"):
            yield line.split()[0]
