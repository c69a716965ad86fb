from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .elements import get_element

Bond = tuple[int, int, int]


@dataclass(frozen=True)
class MolGraph:
    """Heavy-atom molecular graph with integer Kekulé bond orders.

    ``bonds`` holds ``(i, j, order)`` triples with ``i < j``, sorted.
    ``explicit_h`` is ``None`` for atoms whose hydrogens are implicit.
    """

    elements: tuple[str, ...]
    bonds: tuple[Bond, ...] = ()
    explicit_h: tuple[int | None, ...] = field(default=())

    def __post_init__(self):
        n = len(self.elements)
        if not self.explicit_h:
            object.__setattr__(self, "explicit_h", (None,) * n)
        elif len(self.explicit_h) != n:
            raise ValueError("explicit_h length must match elements")
        norm = []
        seen = set()
        for i, j, o in self.bonds:
            if i == j:
                raise ValueError(f"self-loop on atom {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"bond ({i}, {j}) references a missing atom")
            if o not in (1, 2, 3):
                raise ValueError(f"bond order {o} not in (1, 2, 3)")
            a, b = (i, j) if i < j else (j, i)
            if (a, b) in seen:
                raise ValueError(f"duplicate bond ({a}, {b})")
            seen.add((a, b))
            norm.append((a, b, o))
        object.__setattr__(self, "bonds", tuple(sorted(norm)))

    @classmethod
    def build(cls, elements: Iterable[str], bonds: Iterable[Sequence[int]] = ()) -> "MolGraph":
        return cls(tuple(elements), tuple((int(i), int(j), int(o)) for i, j, o in bonds))

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def n_atoms(self) -> int:
        return len(self.elements)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        adj: list[list[tuple[int, int]]] = [[] for _ in self.elements]
        for i, j, o in self.bonds:
            adj[i].append((j, o))
            adj[j].append((i, o))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def _order_map(self) -> dict[tuple[int, int], int]:
        return {(i, j): o for i, j, o in self.bonds}

    def neighbors(self, i: int) -> tuple[tuple[int, int], ...]:
        return self.adjacency[i]

    def bond_order(self, i: int, j: int) -> int | None:
        if i > j:
            i, j = j, i
        return self._order_map.get((i, j))

    def bond_sum(self, i: int) -> int:
        return sum(o for _, o in self.adjacency[i])

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def implicit_h(self, i: int) -> int:
        if self.explicit_h[i] is not None:
            return 0
        return get_element(self.elements[i]).implicit_h(self.bond_sum(i))

    def total_h(self, i: int) -> int:
        h = self.explicit_h[i]
        return h if h is not None else self.implicit_h(i)

    def relabel(self, perm: Sequence[int]) -> "MolGraph":
        """Return the graph with atom ``i`` moved to position ``perm[i]``."""
        n = self.n_atoms
        if sorted(perm) != list(range(n)):
            raise ValueError("perm must be a permutation of atom indices")
        elements = [""] * n
        hs: list[int | None] = [None] * n
        for i, p in enumerate(perm):
            elements[p] = self.elements[i]
            hs[p] = self.explicit_h[i]
        bonds = tuple((perm[i], perm[j], o) for i, j, o in self.bonds)
        return MolGraph(tuple(elements), bonds, tuple(hs))

    def subgraph(self, atoms: Sequence[int], bonds: Iterable[tuple[int, int]] | None = None):
        """Edge-defined subgraph on ``atoms`` (in the given order).

        When ``bonds`` is omitted the induced subgraph is returned.  Returns the
        graph and the local-to-host index map.
        """
        index = {a: k for k, a in enumerate(atoms)}
        if bonds is None:
            chosen = [(i, j, o) for i, j, o in self.bonds if i in index and j in index]
        else:
            chosen = []
            for i, j in bonds:
                o = self.bond_order(i, j)
                if o is None:
                    raise ValueError(f"no bond ({i}, {j}) in host")
                chosen.append((i, j, o))
        local = MolGraph(
            tuple(self.elements[a] for a in atoms),
            tuple((index[i], index[j], o) for i, j, o in chosen),
        )
        return local, tuple(atoms)

    def components(self) -> list[list[int]]:
        seen = [False] * self.n_atoms
        comps = []
        for s in range(self.n_atoms):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [], [s]
            while stack:
                v = stack.pop()
                comp.append(v)
                for u, _ in self.adjacency[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n_atoms <= 1 or len(self.components()) == 1


@dataclass(frozen=True)
class AtomReport:
    index: int
    element: str
    bond_sum: int
    cap: int
    implicit_h: int
    ok: bool


@dataclass(frozen=True)
class ValenceReport:
    atoms: tuple[AtomReport, ...]

    @property
    def ok(self) -> bool:
        return all(a.ok for a in self.atoms)

    @property
    def failures(self) -> tuple[AtomReport, ...]:
        return tuple(a for a in self.atoms if not a.ok)


def validate_valence(g: MolGraph) -> ValenceReport:
    """Per-atom check that the bond-order sum (plus bracket H) stays within cap."""
    reports = []
    for i, sym in enumerate(g.elements):
        el = get_element(sym)
        s = g.bond_sum(i)
        h = g.explicit_h[i]
        used = s + (h or 0)
        ok = used <= el.cap
        implicit = el.implicit_h(s) if (ok and h is None) else 0
        reports.append(AtomReport(i, sym, s, el.cap, implicit, ok))
    return ValenceReport(tuple(reports))
