"""Branch-and-bound weighted Max-SAT over an :class:`AssemblyProblem`.

Depth-first search over decision literals with unit propagation on clauses,
slack propagation on pseudo-Boolean rows, and a connectivity check (every
token already forced reachable must share a component of the not-yet-refuted
link graph).  The bound is the total weight of soft literals not yet false;
a branch is cut when it cannot beat the incumbent.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from .problem import AssemblyProblem, SolverResult

DEFAULT_TIME_MS = 5000
DEFAULT_NODES = 1_000_000


@dataclass(frozen=True)
class Budget:
    time_ms: float | None = DEFAULT_TIME_MS
    nodes: int | None = DEFAULT_NODES


class _Conflict(Exception):
    pass


class _Engine:
    def __init__(self, p: AssemblyProblem):
        self.p = p
        n = p.n_vars
        self.n = n
        self.vals = [0] * (n + 1)
        self.trail: list[int] = []
        self.clauses = [tuple(c) for c in p.clauses]
        # watch lists keyed by literal index: clauses containing the negation
        self.occ: list[list[int]] = [[] for _ in range(2 * n + 1)]
        for k, c in enumerate(self.clauses):
            for x in c:
                self.occ[n - x].append(k)  # becomes relevant when -x is true
        self.pb_terms = [pb.terms for pb in p.pbs]
        self.pb_bound = [pb.bound for pb in p.pbs]
        self.pb_sum = [0] * len(p.pbs)
        self.pb_occ: list[list[tuple[int, int]]] = [[] for _ in range(2 * n + 1)]
        for k, pb in enumerate(p.pbs):
            for c, x in pb.terms:
                self.pb_occ[n + x].append((k, c))
        self.soft_occ: list[float] = [0.0] * (2 * n + 1)  # weight lost when the literal is true
        for w, x in p.soft:
            self.soft_occ[n - x] += w
        self.total = sum(w for w, _ in p.soft)
        self.lost = 0.0
        self.reach = p.reach
        self.conn_items = list(p.conn.items())

    def value(self, x: int) -> int:
        v = self.vals[abs(x)]
        return v if x > 0 else -v

    def assign(self, x: int, queue: list[int]) -> None:
        v = abs(x)
        cur = self.vals[v]
        want = 1 if x > 0 else -1
        if cur == want:
            return
        if cur == -want:
            raise _Conflict
        self.vals[v] = want
        self.trail.append(x)
        self.lost += self.soft_occ[self.n + x]
        for k, c in self.pb_occ[self.n + x]:
            self.pb_sum[k] += c
        queue.append(x)

    def undo_to(self, size: int) -> None:
        n = self.n
        while len(self.trail) > size:
            x = self.trail.pop()
            self.vals[abs(x)] = 0
            self.lost -= self.soft_occ[n + x]
            for k, c in self.pb_occ[n + x]:
                self.pb_sum[k] -= c

    def propagate(self, queue: list[int]) -> None:
        n = self.n
        vals = self.vals
        while queue:
            x = queue.pop()
            for k in self.occ[n + x]:
                unassigned = 0
                last = 0
                sat = False
                for y in self.clauses[k]:
                    v = vals[abs(y)]
                    if v == 0:
                        unassigned += 1
                        last = y
                        if unassigned > 1:
                            break
                    elif (v > 0) == (y > 0):
                        sat = True
                        break
                if sat or unassigned > 1:
                    continue
                if unassigned == 0:
                    raise _Conflict
                self.assign(last, queue)
            for k, _ in self.pb_occ[n + x]:
                slack = self.pb_bound[k] - self.pb_sum[k]
                if slack < 0:
                    raise _Conflict
                for c, y in self.pb_terms[k]:
                    if c > slack and vals[abs(y)] == 0:
                        self.assign(-y, queue)

    def connectivity_ok(self) -> bool:
        vals = self.vals
        sure = [i for i, r in enumerate(self.reach) if vals[r] > 0]
        if len(sure) <= 1:
            return True
        parent = list(range(len(self.reach)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for (i, j), v in self.conn_items:
            if vals[v] >= 0:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
        r0 = find(sure[0])
        return all(find(i) == r0 for i in sure[1:])


def branch_order(p: AssemblyProblem) -> list[int]:
    """User literals, then merges grouped by how constrained their slots are, then roots."""
    slot_load: dict[tuple[int, int], int] = {}
    for m in p.identify + p.bonds:
        for s in ((m.ti, m.a), (m.tj, m.b)):
            slot_load[s] = slot_load.get(s, 0) + 1
    parents = p.blueprint.parents if getattr(p, "guided", True) else None
    prefer = {}
    if parents:
        for child, par in enumerate(parents):
            if par is not None:
                prefer[(min(child, par), max(child, par))] = p.blueprint.merge_types[child]

    def key(m):
        pair = (m.ti, m.tj)
        rank = 1
        if pair in prefer:
            rank = 0
        load = min(slot_load[(m.ti, m.a)], slot_load[(m.tj, m.b)])
        return (rank, load, m.var)

    merges = sorted(p.identify + p.bonds, key=key)
    order = [abs(x) for x in p.branch_first]
    order += [m.var for m in merges]
    order += list(p.roots)
    seen = set()
    out = []
    for v in order + list(p.decision) + list(range(1, p.n_vars + 1)):
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def _greedy_incumbent(p: AssemblyProblem, order: list[int]) -> list[bool] | None:
    """One propagating dive that grows a connected assembly from a root.

    User literals take their hinted phase, the root is the first token
    already forced reachable (else token 0), then merges that attach an
    unreached token to the reached set are switched on while propagation
    allows.  Everything left is set false where possible.
    """
    eng = _Engine(p)
    queue: list[int] = []
    try:
        for c in eng.clauses:
            if len(c) == 1:
                eng.assign(c[0], queue)
        eng.propagate(queue)
        for k in range(len(eng.pb_terms)):
            for c, y in eng.pb_terms[k]:
                if c > eng.pb_bound[k] - eng.pb_sum[k] and eng.vals[abs(y)] == 0:
                    eng.assign(-y, queue)
        eng.propagate(queue)
    except _Conflict:
        return None

    def decide(lit: int) -> bool:
        if eng.vals[abs(lit)] != 0:
            return eng.value(lit) > 0
        size = len(eng.trail)
        if _try(eng, lit):
            return True
        eng.undo_to(size)
        if not _try(eng, -lit):
            raise _Conflict
        return False

    def close() -> bool:
        # set everything still open to false where propagation allows
        try:
            for v in order:
                if eng.vals[v] == 0:
                    decide(-v)
            return True
        except _Conflict:
            return False

    try:
        for x in p.branch_first:
            decide(x if p.hints.get(abs(x), True) else -x)
        n = len(p.roots)
        root = next((i for i in range(n) if eng.vals[p.reach[i]] > 0), 0)
        if n and not decide(p.roots[root]):
            return None
    except _Conflict:
        return None
    rank = {v: k for k, v in enumerate(order)}
    merges = sorted(p.identify + p.bonds, key=lambda m: rank[m.var])

    def component() -> set[int]:
        seen, stack = {root}, [root]
        while stack:
            i = stack.pop()
            for (a, b), v in p.conn.items():
                if eng.vals[v] > 0 and i in (a, b):
                    j = b if a == i else a
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
        return seen

    grown = True
    while grown:
        grown = False
        for m in merges:
            comp = component()
            if eng.vals[m.var] != 0 or (m.ti in comp) == (m.tj in comp):
                continue
            size = len(eng.trail)
            if not _try(eng, m.var):
                eng.undo_to(size)
                continue
            # keep the merge only if the rest can still be closed off
            mark = len(eng.trail)
            ok = close()
            eng.undo_to(mark)
            if ok:
                grown = True
            else:
                eng.undo_to(size)
    if not close():
        return None
    vals = [eng.vals[v] > 0 for v in range(eng.n + 1)]
    if p.violations(vals) or not p.connected(vals):
        return None
    return vals


def solve(p: AssemblyProblem, budget: Budget | None = None) -> SolverResult:
    budget = budget or Budget()
    start = time.perf_counter()
    eng = _Engine(p)
    order = branch_order(p)
    best: float = float("-inf")
    best_vals: list[bool] | None = None
    nodes = 0
    exhausted = False

    # cheap incumbent: no merges, first token as root
    seed = {v: False for v in p.decision}
    if p.roots:
        seed[p.roots[0]] = True
    obj = p.evaluate(seed)
    if obj is not None:
        best, best_vals = obj, p.complete(seed)
    greedy = _greedy_incumbent(p, order)
    if greedy is not None and p.objective(greedy) > best:
        best, best_vals = p.objective(greedy), greedy

    def elapsed_ms():
        return (time.perf_counter() - start) * 1000.0

    queue: list[int] = []
    try:
        for c in eng.clauses:
            if not c:
                raise _Conflict
            if len(c) == 1:
                eng.assign(c[0], queue)
        eng.propagate(queue)
        for k in range(len(eng.pb_terms)):
            slack = eng.pb_bound[k] - eng.pb_sum[k]
            if slack < 0:
                raise _Conflict
            for c, y in eng.pb_terms[k]:
                if c > slack and eng.vals[abs(y)] == 0:
                    eng.assign(-y, queue)
        eng.propagate(queue)
        root_ok = True
    except _Conflict:
        root_ok = False

    stack: list[list[int]] = []  # [var, trail size before decision, phase]
    if root_ok:
        ok = True
        while True:
            if ok:
                nodes += 1
                if (budget.nodes is not None and nodes > budget.nodes) or (
                    budget.time_ms is not None and nodes % 128 == 0 and elapsed_ms() > budget.time_ms
                ):
                    exhausted = True
                    break
                if eng.total - eng.lost <= best or not eng.connectivity_ok():
                    ok = False
                else:
                    var = next((v for v in order if eng.vals[v] == 0), None)
                    if var is None:
                        vals = [eng.vals[v] > 0 for v in range(eng.n + 1)]
                        if p.connected(vals):
                            best = eng.total - eng.lost
                            best_vals = vals
                        ok = False
                    else:
                        stack.append([var, len(eng.trail), 1])
                        ok = _try(eng, var)
                        continue
            # backtrack
            ok = False
            while stack:
                var, size, phase = stack[-1]
                eng.undo_to(size)
                if phase == 1:
                    stack[-1][2] = 2
                    ok = _try(eng, -var)
                    break
                stack.pop()
            if not stack and not ok:
                break
    seconds = time.perf_counter() - start
    if best_vals is not None:
        res = SolverResult("SAT", best_vals, best, optimal=not exhausted, nodes=nodes, seconds=seconds)
        res.distances = p.distances(best_vals)
        return res
    if exhausted:
        return SolverResult("TimedOut", nodes=nodes, seconds=seconds, reason="budget exhausted")
    return SolverResult("UNSAT", nodes=nodes, seconds=seconds, optimal=True, reason=p.note)


def _try(eng: _Engine, lit: int) -> bool:
    queue: list[int] = []
    try:
        eng.assign(lit, queue)
        eng.propagate(queue)
        return True
    except _Conflict:
        return False


def brute_force(p: AssemblyProblem, limit: int = 20) -> SolverResult:
    """Exhaustive optimum over merge variables and root choice (testing oracle)."""
    merges = [v for v in p.decision if v not in set(p.roots)]
    if len(merges) > limit:
        raise ValueError(f"{len(merges)} merge variables exceed brute-force limit {limit}")
    best, best_vals = None, None
    for bits in itertools.product((False, True), repeat=len(merges)):
        base = dict(zip(merges, bits))
        for r in range(len(p.roots)):
            d = dict(base)
            for k, v in enumerate(p.roots):
                d[v] = k == r
            obj = p.evaluate(d)
            if obj is not None and (best is None or obj > best):
                best, best_vals = obj, p.complete(d)
    if best is None:
        return SolverResult("UNSAT", optimal=True)
    return SolverResult("SAT", best_vals, best, optimal=True)
