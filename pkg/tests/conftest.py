import random
from pathlib import Path

import pytest

from nsggm.decompose import decompose_corpus
from nsggm.molgraph import MolGraph, parse_smiles, read_corpus
from nsggm.vocab import build_vocabulary

CORPUS = Path(__file__).resolve().parents[1] / "src" / "nsggm" / "data" / "corpus.smi"


def permuted(g: MolGraph, rng: random.Random) -> MolGraph:
    perm = list(range(g.n_atoms))
    rng.shuffle(perm)
    return g.relabel(perm)


@pytest.fixture(scope="session")
def corpus_smiles() -> list[str]:
    return read_corpus(CORPUS)


@pytest.fixture(scope="session")
def corpus_graphs(corpus_smiles) -> list[MolGraph]:
    return [parse_smiles(s) for s in corpus_smiles]


@pytest.fixture(scope="session")
def corpus_vocab(corpus_graphs):
    return build_vocabulary(corpus_graphs, blueprints=decompose_corpus(corpus_graphs)[0])


@pytest.fixture(scope="session")
def corpus_blueprints(corpus_graphs):
    return decompose_corpus(corpus_graphs)[0]


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
