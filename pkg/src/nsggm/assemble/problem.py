"""Boolean assembly problems: variables, gates, clauses, pseudo-Boolean rows and soft terms.

Literals are non-zero integers: ``v`` for a variable and ``-v`` for its
negation, with variables numbered from 1.  Gates define a variable as the
AND/OR of other literals and are created in dependency order, so a single
forward pass computes every gate from the decision variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..decompose import Blueprint


@dataclass(frozen=True)
class Weights:
    reach: float = 10.0
    conn: float = 1.0
    parent: float = 5.0

    def __post_init__(self):
        if min(self.reach, self.conn, self.parent) <= 0:
            raise ValueError("soft weights must be positive")

    @classmethod
    def parse(cls, text: str) -> "Weights":
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 3:
            raise ValueError("weights need three comma-separated values")
        return cls(*parts)


@dataclass(frozen=True)
class Gate:
    out: int
    op: str  # "and" | "or"
    inputs: tuple[int, ...]


@dataclass(frozen=True)
class PB:
    """``sum(c * lit) <= bound`` with positive integer coefficients."""

    terms: tuple[tuple[int, int], ...]
    bound: int


@dataclass(frozen=True)
class IdentifyMerge:
    var: int
    ti: int
    a: int
    tj: int
    b: int

    @property
    def name(self) -> str:
        return f"m_{self.ti}_{self.a}_{self.tj}_{self.b}"


@dataclass(frozen=True)
class BondMerge:
    var: int
    ti: int
    a: int
    tj: int
    b: int
    order: int

    @property
    def name(self) -> str:
        return f"b_{self.ti}_{self.a}_{self.tj}_{self.b}_{self.order}"


@dataclass(frozen=True)
class EdgeMerge:
    var: int
    ti: int
    edge_a: tuple[int, int]
    tj: int
    edge_b: tuple[int, int]
    orientation: str  # "parallel" | "swapped"
    endpoint_vars: tuple[int, int]

    @property
    def name(self) -> str:
        (a1, a2), (b1, b2) = self.edge_a, self.edge_b
        return f"e_{self.ti}_{a1}_{a2}_{self.tj}_{b1}_{b2}_{self.orientation[0]}"


class AssemblyProblem:
    def __init__(self, blueprint: Blueprint, weights: Weights | None = None):
        self.blueprint = blueprint
        self.weights = weights or Weights()
        self.names: list[str] = [""]  # index 0 unused
        self.index: dict[str, int] = {}
        self.decision: list[int] = []
        self.gates: list[Gate] = []
        self.gate_of: dict[int, Gate] = {}
        self.clauses: list[tuple[int, ...]] = []
        self.pbs: list[PB] = []
        self.soft: list[tuple[float, int]] = []
        self.identify: list[IdentifyMerge] = []
        self.bonds: list[BondMerge] = []
        self.edges: list[EdgeMerge] = []
        self.roots: list[int] = []
        self.active: list[int] = []
        self.reach: list[int] = []
        self.conn: dict[tuple[int, int], int] = {}
        self.branch_first: list[int] = []
        self.hints: dict[int, bool] = {}  # preferred phase for branch_first variables
        self.labels: dict[str, int] = {}  # named user-facing literals
        self.post_checks: list = []  # callables run on decoded graphs
        self._ident: dict = {}
        self._true: int | None = None
        self.note: str | None = None

    # -- construction ------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self.names) - 1

    def new_var(self, name: str, decision: bool = False) -> int:
        if name in self.index:
            raise ValueError(f"duplicate variable {name}")
        self.names.append(name)
        v = len(self.names) - 1
        self.index[name] = v
        if decision:
            self.decision.append(v)
        return v

    def true_lit(self) -> int:
        if self._true is None:
            self._true = self.new_var("const_true")
            self.gates.append(Gate(self._true, "and", ()))
            self.gate_of[self._true] = self.gates[-1]
            self.clauses.append((self._true,))
        return self._true

    def gate(self, name: str, op: str, inputs: Iterable[int]) -> int:
        """Define ``name`` as AND/OR of ``inputs`` (Tseitin clauses included)."""
        inputs = tuple(inputs)
        if op not in ("and", "or"):
            raise ValueError(op)
        out = self.new_var(name)
        g = Gate(out, op, inputs)
        self.gates.append(g)
        self.gate_of[out] = g
        if op == "and":
            for x in inputs:
                self.clauses.append((-out, x))
            self.clauses.append((out,) + tuple(-x for x in inputs))
        else:
            for x in inputs:
                self.clauses.append((out, -x))
            self.clauses.append((-out,) + inputs)
        return out

    def add_clause(self, lits: Iterable[int]) -> None:
        lits = tuple(dict.fromkeys(lits))
        if any(-x in lits for x in lits):
            return
        self.clauses.append(lits)

    def add_pb(self, terms: Iterable[tuple[int, int]], bound: int) -> None:
        """Add ``sum(c * lit) <= bound``; negative coefficients are normalised."""
        acc: dict[int, int] = {}
        for c, lit in terms:
            if c == 0:
                continue
            if c < 0:
                bound -= c
                c, lit = -c, -lit
            acc[lit] = acc.get(lit, 0) + c
        norm = []
        for lit, c in acc.items():
            if -lit in acc and lit > 0:
                # c*x + d*(1-x) -> (c-d)*x + d
                d = acc[-lit]
                bound -= min(c, d)
                if c > d:
                    norm.append((c - d, lit))
                elif d > c:
                    norm.append((d - c, -lit))
            elif -lit not in acc:
                norm.append((c, lit))
        norm.sort(key=lambda t: (abs(t[1]), t[1]))
        total = sum(c for c, _ in norm)
        if total <= bound:
            return
        self.pbs.append(PB(tuple(norm), bound))

    def add_soft(self, weight: float, lit: int) -> None:
        if weight <= 0:
            raise ValueError("soft weights must be positive")
        self.soft.append((weight, lit))

    # -- semantics ---------------------------------------------------------

    @property
    def max_objective(self) -> float:
        return sum(w for w, _ in self.soft)

    def complete(self, decisions: dict[int, bool]) -> list[bool]:
        """Full assignment (index by variable) from decision values via gates."""
        vals = [False] * (self.n_vars + 1)
        for v in self.decision:
            vals[v] = bool(decisions.get(v, False))
        for g in self.gates:
            lits = [vals[abs(x)] == (x > 0) for x in g.inputs]
            vals[g.out] = all(lits) if g.op == "and" else any(lits)
        return vals

    def violations(self, vals: Sequence[bool]) -> list[str]:
        """Names of violated constraint families under a full assignment."""
        def lit(x):
            return vals[abs(x)] == (x > 0)

        out = []
        for g in self.gates:
            got = [lit(x) for x in g.inputs]
            want = all(got) if g.op == "and" else any(got)
            if vals[g.out] != want:
                out.append(f"gate:{self.names[g.out]}")
        for c in self.clauses:
            if not any(lit(x) for x in c):
                out.append("clause:" + " ".join(("" if x > 0 else "!") + self.names[abs(x)] for x in c))
        for pb in self.pbs:
            if sum(c for c, x in pb.terms if lit(x)) > pb.bound:
                out.append(f"pb:{pb.bound}")
        if not self.connected(vals):
            out.append("connectivity")
        return out

    def connected(self, vals: Sequence[bool]) -> bool:
        """Every reached token lies in the root's component of selected links."""
        n = len(self.reach)
        roots = [i for i in range(n) if vals[self.roots[i]]]
        reached = [i for i in range(n) if vals[self.reach[i]]]
        if not reached:
            return True
        if len(roots) != 1:
            return False
        adj: dict[int, list[int]] = {}
        for (i, j), v in self.conn.items():
            if vals[v]:
                adj.setdefault(i, []).append(j)
                adj.setdefault(j, []).append(i)
        seen, stack = {roots[0]}, [roots[0]]
        while stack:
            for u in adj.get(stack.pop(), ()):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return all(i in seen for i in reached)

    def objective(self, vals: Sequence[bool]) -> float:
        return sum(w for w, x in self.soft if vals[abs(x)] == (x > 0))

    def evaluate(self, decisions: dict[int, bool]) -> float | None:
        """Objective of a decision assignment, or ``None`` when infeasible."""
        vals = self.complete(decisions)
        if self.violations(vals):
            return None
        return self.objective(vals)

    def distances(self, vals: Sequence[bool]) -> dict[int, int]:
        """BFS depth of each reached token from the root over selected links."""
        n = len(self.reach)
        roots = [i for i in range(n) if vals[self.roots[i]]]
        if not roots:
            return {}
        adj: dict[int, list[int]] = {}
        for (i, j), v in self.conn.items():
            if vals[v]:
                adj.setdefault(i, []).append(j)
                adj.setdefault(j, []).append(i)
        dist = {roots[0]: 0}
        queue = [roots[0]]
        while queue:
            x = queue.pop(0)
            for u in sorted(adj.get(x, ())):
                if u not in dist:
                    dist[u] = dist[x] + 1
                    queue.append(u)
        return dist

    def merge_vars(self) -> list[int]:
        return [m.var for m in self.identify] + [m.var for m in self.bonds]

    def summary(self) -> dict:
        return {
            "tokens": len(self.blueprint.tokens),
            "identify": len(self.identify),
            "bond": len(self.bonds),
            "edge": len(self.edges),
            "vars": self.n_vars,
            "clauses": len(self.clauses),
            "pb": len(self.pbs),
            "soft": len(self.soft),
        }


@dataclass
class SolverResult:
    status: str  # "SAT" | "UNSAT" | "TimedOut"
    values: list[bool] | None = None
    objective: float | None = None
    optimal: bool = False
    nodes: int = 0
    seconds: float = 0.0
    reason: str | None = None
    distances: dict[int, int] = field(default_factory=dict)
    raw: dict[str, bool] = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == "SAT"

    def value(self, problem: AssemblyProblem, name: str) -> bool:
        return bool(self.values[problem.index[name]])
