"""Regenerate the shipped toy corpus (src/nsggm/data/corpus.smi).

Small Kekulé molecules in the QM9/drug-fragment style: substituted
heteroaromatic rings, a few fused and linked bicyclics, and acyclic
fragments.  No molecule carries pyridine, pyrimidine and thiazole together.
"""

from __future__ import annotations

import sys
from pathlib import Path

from nsggm.logic import default_library, evaluate, parse_expr
from nsggm.molgraph import canonical_key, parse_smiles, validate_valence

# ring written so that its first atom carries the substituent
RINGS = {
    "benzene": "C1=CC=CC=C1",
    "pyridin-2": "C1=CC=CC=N1",
    "pyridin-3": "C1=CN=CC=C1",
    "pyridin-4": "C1=CC=NC=C1",
    "pyrimidin-2": "C1=NC=CC=N1",
    "pyrimidin-5": "C1=CN=CN=C1",
    "imidazol-4": "C1=CN=CN1",
    "imidazol-2": "C1=NC=CN1",
    "thiazol-4": "C1=CSC=N1",
    "thiazol-2": "C1=NC=CS1",
    "furan": "C1=CC=CO1",
    "thiophene": "C1=CC=CS1",
    "cyclohexane": "C1CCCCC1",
    "cyclopentane": "C1CCCC1",
    "cyclopropane": "C1CC1",
}

# substituent written as a prefix bonded to the ring's first atom
SUBSTITUENTS = {
    "methyl": "C",
    "nitrile": "N#C",
    "cf3": "FC(F)(F)",
    "carboxamide": "NC(=O)",
    "acetamido": "CC(=O)N",
    "sulfonamide": "NS(=O)(=O)",
    "tbu": "CC(C)(C)",
    "hydroxy": "O",
    "methoxy": "CO",
    "amino": "N",
    "fluoro": "F",
    "chloro": "Cl",
    "ethyl": "CC",
    "formyl": "O=C",
    "hydroxymethyl": "OC",
}

# para-like disubstitution templates: {a} prefix, {b} on the ring's far atom
DISUB = {
    "benzene": "{a}C1=CC=C({b})C=C1",
    "pyridine": "{a}C1=CC=C({b})C=N1",
    "pyrimidine": "{a}C1=NC=C({b})C=N1",
    "thiazole": "{a}C1=NC=C({b})S1",
    "imidazole": "{a}C1=NC=C({b})N1",
}

SECOND = {
    "methyl": "C",
    "nitrile": "C#N",
    "cf3": "C(F)(F)F",
    "carboxamide": "C(=O)N",
    "sulfonamide": "S(=O)(=O)N",
    "tbu": "C(C)(C)C",
    "hydroxy": "O",
    "amino": "N",
    "fluoro": "F",
}

BICYCLIC = [
    "C1=CC=C2C=CC=CC2=C1",
    "C1=CC=C2N=CC=CC2=C1",
    "CC1=CC=C2N=CC=CC2=C1",
    "C1=CC=C2NC=CC2=C1",
    "C1=CC=C2NC=NC2=C1",
    "C1=CC=C2SC=NC2=C1",
    "C1=CC=C(C=C1)C1=CC=CC=C1",
    "C1=CC=C(C=C1)C1=CC=NC=C1",
    "C1=CC=C(C=C1)C1=NC=CS1",
    "C1=CC=C(C=C1)C1=CN=CN=C1",
    "C1=CC=C(C=C1)CC1=CC=CC=C1",
    "C1=CC=C(C=C1)OC1=CC=CC=C1",
    "C1=CC=C(C=C1)NC(=O)C1=CC=CC=C1",
    "C1=CN=CC=C1C1=CC=CS1",
    "C1CCC2CCCCC2C1",
    "C1CC2CCC1C2",
    "C1CCC(CC1)C1=CC=CC=C1",
    "C1=CC=C(C=C1)N1CCCCC1",
    "C1=CC=C(C=C1)N1CCOCC1",
    "O=C1CCCCC1",
    "C1COCCN1",
    "C1CCNCC1",
    "C1CCOC1",
    "N#CC1=CC=C(C=C1)C1=CC=NC=C1",
    "NC(=O)C1=CC=C(C=C1)C1=NC=CS1",
]

ACYCLIC = [
    "C", "CC", "CCC", "CCO", "CCN", "CC#N", "CC(=O)O", "CC(=O)N", "CC(C)O", "CC(C)(C)O",
    "CC(C)(C)N", "CC(C)(C)C#N", "CCOC", "C=CC", "C=CC#N", "CC=O", "NC(=O)CC#N", "CS(=O)(=O)N",
    "CS(=O)(=O)NC", "FC(F)(F)CO", "FC(F)(F)C(=O)N", "CC(=O)NC", "OCC(O)CO", "NCC(=O)O",
    "CC(N)C(=O)O", "CCCC#N", "CCC(=O)N", "CC(C)(C)C(=O)N", "CC(C)(C)S(=O)(=O)N", "N#CCC#N",
    "CCCO", "CCCN", "CC(C)C", "CC(C)CO", "COC(=O)C", "CNC(=O)C", "CN(C)C", "OC(=O)CC(=O)O",
    "C#CC", "C#CCO", "NC(=N)N", "CC(=O)C", "CCOC(=O)N", "FC(F)(F)C#N", "NS(=O)(=O)CC#N",
]


def build() -> list[str]:
    out: list[str] = []
    for ring in RINGS.values():
        out.append(ring)
        for sub in SUBSTITUENTS.values():
            out.append(sub + ring)
    for tmpl in DISUB.values():
        for a in ("C", "N#C", "NC(=O)", "FC(F)(F)", "NS(=O)(=O)", "CC(C)(C)"):
            for b in SECOND.values():
                out.append(tmpl.format(a=a, b=b))
    out += BICYCLIC + ACYCLIC
    return out


def main(path: str) -> None:
    lib = default_library()
    triple = parse_expr("P & Q & H")
    seen, kept = set(), []
    for smi in build():
        g = parse_smiles(smi)
        if not validate_valence(g).ok:
            raise SystemExit(f"invalid valence: {smi}")
        if evaluate(triple, g, lib)[0]:
            raise SystemExit(f"corpus must not contain P & Q & H: {smi}")
        key = canonical_key(g)
        if key in seen:
            continue
        seen.add(key)
        kept.append(smi)
    header = "# toy corpus: Kekule SMILES, one per line (regenerate with tools/make_corpus.py)\n"
    Path(path).write_text(header + "\n".join(kept) + "\n")
    print(f"wrote {len(kept)} molecules to {path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/nsggm/data/corpus.smi")
