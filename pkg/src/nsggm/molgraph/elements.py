"""Element table and valence rules.

Every supported element carries the list of neutral valences it may take.
The cap is the largest of these; implicit hydrogens fill an atom up to the
smallest listed valence that is not below its explicit bond-order sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Element:
    symbol: str
    valences: tuple[int, ...]

    def __post_init__(self):
        if not self.valences or min(self.valences) <= 0:
            raise ValueError(f"element {self.symbol!r} needs positive valences")

    @property
    def cap(self) -> int:
        return max(self.valences)

    def implicit_h(self, bond_sum: int) -> int:
        for v in sorted(self.valences):
            if v >= bond_sum:
                return v - bond_sum
        return 0


# Organic subset used by QM9/GuacaMol-style corpora.  S is capped at 6 so
# that sulfonamide S(=O)(=O)N is representable.
DEFAULT_ELEMENTS: dict[str, Element] = {
    e.symbol: e
    for e in (
        Element("H", (1,)),
        Element("B", (3,)),
        Element("C", (4,)),
        Element("N", (3,)),
        Element("O", (2,)),
        Element("F", (1,)),
        Element("P", (3, 5)),
        Element("S", (2, 4, 6)),
        Element("Cl", (1,)),
        Element("Br", (1,)),
        Element("I", (1,)),
    )
}

# Symbols that may be written without brackets.
ORGANIC_SUBSET = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")

_table: dict[str, Element] = dict(DEFAULT_ELEMENTS)


def element_table() -> dict[str, Element]:
    return _table


def get_element(symbol: str) -> Element:
    try:
        return _table[symbol]
    except KeyError:
        from .smiles import UnknownElement

        raise UnknownElement(f"unsupported element {symbol!r}") from None


def cap(symbol: str) -> int:
    return get_element(symbol).cap


def load_element_table(path: str | Path) -> dict[str, Element]:
    """Replace the active table with one read from a JSON file.

    The file maps symbols to a list of valences, e.g. ``{"C": [4], "S": [2, 4, 6]}``.
    """
    raw = json.loads(Path(path).read_text())
    table = {sym: Element(sym, tuple(int(v) for v in vals)) for sym, vals in raw.items()}
    set_element_table(table)
    return table


def set_element_table(table: dict[str, Element]) -> None:
    global _table
    _table = dict(table)


def reset_element_table() -> None:
    set_element_table(DEFAULT_ELEMENTS)
