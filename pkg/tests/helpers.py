"""Random blueprints and instances shared by the assembly tests."""

import random
from contextlib import contextmanager

from nsggm.assemble import build_problem
from nsggm.decompose import Blueprint


def random_blueprint(rng: random.Random, vocab, max_tokens: int = 4) -> Blueprint:
    """A few vocabulary tokens with random stored variants and a random parent forest."""
    keys = vocab.motif_keys
    n = rng.randint(1, max_tokens)
    tokens, parents, merges = [], [], []
    for pos in range(n):
        entry = vocab[rng.choice(keys)]
        tokens.append(entry.token(rng.choice(entry.variants)))
        par = rng.randrange(pos) if pos and rng.random() < 0.8 else None
        parents.append(par)
        merges.append(None if par is None else rng.choice(("node", "edge")))
    return Blueprint(tuple(tokens), tuple(parents), tuple(merges))


def merge_count(problem) -> int:
    return len([v for v in problem.decision if v not in set(problem.roots)])


def small_instance(rng: random.Random, vocab, max_vars: int = 14, max_tokens: int = 3):
    """Rejection-sample a problem whose merge variables fit brute force."""
    while True:
        bp = random_blueprint(rng, vocab, max_tokens)
        p = build_problem(bp, guided=rng.random() < 0.5)
        if 1 <= merge_count(p) <= max_vars:
            return bp, p


ACCEPTANCE: list[str] = []


@contextmanager
def criterion(number: int, title: str):
    """Record one PASS/FAIL line; ``detail`` collects measured values for the line."""
    detail: list[str] = []
    try:
        yield detail
    except BaseException:
        line = f"[{number:>2}] FAIL  {title}  {'; '.join(detail)}"
        ACCEPTANCE.append(line)
        print(line)
        raise
    line = f"[{number:>2}] PASS  {title}  {'; '.join(detail)}"
    ACCEPTANCE.append(line)
    print(line)
