"""SMT-LIB2 export of assembly problems and model parsing for external solvers.

Reachability is written with integer depths: the root has depth 0 and
every other reached token needs a reached, linked neighbour one level
closer to the root.  Soft terms become ``assert-soft`` with weights.
"""

from __future__ import annotations

import re
import shutil
import subprocess
import tempfile
import time
from pathlib import Path

from .problem import AssemblyProblem, SolverResult


class ModelParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, text: str = ""):
        self.line = line
        super().__init__(f"line {line}: {message}: {text!r}" if line is not None else message)


def _lit(p: AssemblyProblem, x: int) -> str:
    name = p.names[abs(x)]
    return name if x > 0 else f"(not {name})"


def _or(parts: list[str]) -> str:
    if not parts:
        return "false"
    return parts[0] if len(parts) == 1 else f"(or {' '.join(parts)})"


def _and(parts: list[str]) -> str:
    if not parts:
        return "true"
    return parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"


def _weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def emit_smtlib(p: AssemblyProblem) -> str:
    n = len(p.reach)
    out = [
        "; assembly problem",
        "(set-option :produce-models true)",
        "(set-logic QF_LIA)",
    ]
    for v in range(1, p.n_vars + 1):
        out.append(f"(declare-fun {p.names[v]} () Bool)")
    for i in range(n):
        out.append(f"(declare-fun dist_{i} () Int)")
    for g in p.gates:
        body = [_lit(p, x) for x in g.inputs]
        rhs = _and(body) if g.op == "and" else _or(body)
        out.append(f"(assert (= {p.names[g.out]} {rhs}))")
    for c in p.clauses:
        if _is_gate_clause(p, c):
            continue
        out.append(f"(assert {_or([_lit(p, x) for x in c])})")
    for pb in p.pbs:
        terms = " ".join(f"(ite {_lit(p, x)} {c} 0)" for c, x in pb.terms)
        out.append(f"(assert (<= (+ 0 {terms}) {pb.bound}))")
    # reachability with depths replaces the built-in connectivity propagator
    for i in range(n):
        out.append(f"(assert (and (<= 0 dist_{i}) (< dist_{i} {max(n, 1)})))")
        out.append(f"(assert (=> {p.names[p.roots[i]]} (= dist_{i} 0)))")
        steps = []
        for (a, b), v in sorted(p.conn.items()):
            if i in (a, b):
                j = b if a == i else a
                steps.append(f"(and {p.names[p.reach[j]]} {p.names[v]} (= dist_{i} (+ dist_{j} 1)))")
        out.append(
            f"(assert (=> (and {p.names[p.reach[i]]} (not {p.names[p.roots[i]]})) {_or(steps)}))"
        )
    for w, x in p.soft:
        out.append(f"(assert-soft {_lit(p, x)} :weight {_weight(w)})")
    out.append("(check-sat)")
    out.append("(get-model)")
    return "\n".join(out) + "\n"


def _is_gate_clause(p: AssemblyProblem, c: tuple[int, ...]) -> bool:
    """Tseitin clauses are implied by the gate equalities already asserted."""
    for x in c:
        g = p.gate_of.get(abs(x))
        if g is None:
            continue
        rest = sorted(y for y in c if y != x)
        if g.op == "and":
            if x < 0 and len(c) == 2 and rest[0] in g.inputs:
                return True
            if x > 0 and rest == sorted(-y for y in g.inputs):
                return True
        else:
            if x > 0 and len(c) == 2 and -rest[0] in g.inputs:
                return True
            if x < 0 and rest == sorted(g.inputs):
                return True
    return False


_DEFINE = re.compile(r"\(define-fun\s+(\S+)\s+\(\)\s+(Bool|Int)\s+(.+?)\)\s*$", re.S)


def _sexprs(text: str) -> list[tuple[str, int]]:
    """Top-level ``define-fun`` forms with their starting line numbers."""
    forms = []
    depth = 0
    start = None
    line = 1
    start_line = 1
    for k, ch in enumerate(text):
        if ch == "\n":
            line += 1
        if ch == "(":
            if depth == 1 and text.startswith("(define-fun", k):
                start, start_line = k, line
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 1 and start is not None:
                forms.append((text[start : k + 1], start_line))
                start = None
            if depth < 0:
                raise ModelParseError("unbalanced parentheses", line, text.splitlines()[line - 1])
    if depth != 0:
        raise ModelParseError("unbalanced parentheses at end of model", line, "")
    return forms


def _int_value(text: str) -> int:
    text = " ".join(text.split())
    m = re.fullmatch(r"\(\s*-\s*(\d+)\s*\)", text)
    if m:
        return -int(m.group(1))
    return int(text)


def parse_model(text: str, p: AssemblyProblem | None = None) -> SolverResult:
    """Read ``sat``/``unsat`` and a ``(model ...)`` block of ``define-fun`` bindings."""
    lines = [ln.strip() for ln in text.splitlines()]
    first = next(((k, ln) for k, ln in enumerate(lines, 1) if ln and not ln.startswith(";")), None)
    if first is None:
        raise ModelParseError("empty solver output")
    k, status = first
    if status == "unsat":
        return SolverResult("UNSAT", optimal=True, reason="external solver refutation")
    if status in ("unknown", "timeout"):
        return SolverResult("TimedOut", reason=f"external solver answered {status}")
    if status != "sat":
        raise ModelParseError("expected sat/unsat", k, status)
    body = "\n".join(text.splitlines()[k:])
    bools: dict[str, bool] = {}
    ints: dict[str, int] = {}
    for form, ln in _sexprs("(" + body + ")" if not body.strip().startswith("(") else body):
        m = _DEFINE.match(" ".join(form.split()))
        if not m:
            raise ModelParseError("unrecognised binding", k + ln - 1, form)
        name, sort, val = m.group(1), m.group(2), m.group(3).strip()
        if sort == "Bool":
            if val not in ("true", "false"):
                raise ModelParseError("bad Bool value", k + ln - 1, form)
            bools[name] = val == "true"
        else:
            try:
                ints[name] = _int_value(val)
            except ValueError as exc:
                raise ModelParseError("bad Int value", k + ln - 1, form) from exc
    res = SolverResult("SAT")
    res.distances = {int(n.split("_")[1]): v for n, v in ints.items() if n.startswith("dist_")}
    res.raw = bools
    if p is not None:
        decisions = {v: bools.get(p.names[v], False) for v in p.decision}
        vals = p.complete(decisions)
        res.values = vals
        bad = p.violations(vals)
        if bad:
            raise ModelParseError(f"external model violates {bad[0]}")
        res.objective = p.objective(vals)
        res.optimal = True
    return res


def find_external_solver() -> str | None:
    return shutil.which("z3")


def run_external(p: AssemblyProblem, path: str, timeout_s: float = 60.0) -> SolverResult:
    """Run ``<path> <file.smt2>`` and parse its answer."""
    start = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        f = Path(tmp) / "problem.smt2"
        f.write_text(emit_smtlib(p))
        try:
            proc = subprocess.run([path, str(f)], capture_output=True, text=True, timeout=timeout_s)
        except subprocess.TimeoutExpired:
            return SolverResult("TimedOut", reason="external solver timed out")
    res = parse_model(proc.stdout, p)
    res.seconds = time.perf_counter() - start
    return res
