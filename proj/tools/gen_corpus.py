#!/usr/bin/env python3
"""Generate the bundled synthetic corpus (data/corpus.csv).

Molecules are assembled from scaffold templates, substituents and linkers.
Labels follow the scaffold family; activities are seeded random values.
"""

import argparse
import itertools
import random
import re

ARYL = [
    "c1ccccc1",
    "c1ccc(F)cc1",
    "c1ccc(Cl)cc1",
    "c1ccc(Br)cc1",
    "c1ccc(OC)cc1",
    "c1ccc(C)cc1",
    "c1ccc(C(F)(F)F)cc1",
    "c1ccc(C#N)cc1",
    "c1ccncc1",
    "c1cccnc1",
    "c1ccsc1",
    "c1ccoc1",
    "c1ccc2ccccc2c1",
    "c1ccc(O)cc1",
    "c1ccc(N)cc1",
    "c1cc(F)cc(F)c1",
]

ALKYL = [
    "C",
    "CC",
    "CCC",
    "CC(C)C",
    "C(C)(C)C",
    "C1CCCCC1",
    "C1CCCC1",
    "C1CC1",
    "CCO",
    "CCOC",
    "CCN(C)C",
    "C1CCOCC1",
    "C1CCN(C)CC1",
    "CC(=O)O",
]

SMALL = ["F", "Cl", "Br", "C", "OC", "O", "N", "C#N", "C(F)(F)F", "OCC", "N(C)C", "S(C)(=O)=O"]
# The same groups written to attach through their last atom, for a leading slot.
HEAD = ["F", "Cl", "Br", "C", "CO", "O", "N", "N#C", "FC(F)(F)", "CCO", "CN(C)", "CS(=O)(=O)"]

LINKER = ["", "C", "CC", "O", "N", "C(=O)N", "NC(=O)", "S(=O)(=O)", "OC", "CO", "C=C"]

DIABETES = [
    "{A}S(=O)(=O)NC(=O)N{B}",
    "O=C1NC(=O)SC1Cc1ccc(O{L}{A})cc1",
    "N=C(N)NC(=N)N{B}",
    "N{B}C(=O)C{A}",
    "OCC1OC(O{A})C(O)C(O)C1O",
    "CC(C)CC(NC(=O){A})C(=O)O",
    "O=C(O)Cc1ccc({S})cc1{L}{A}",
    "N1CCN(CC1)C(=O){A}",
]

LUNG_CANCER = [
    "{H}c1ccc2ncnc(Nc3ccc({X})cc3)c2c1",
    "{A}Nc1nccc(n1){B}",
    "O=C1Nc2ccc({S})cc2C1=C{A}",
    "{A}{L}c1cc(C(=O)N{B})ccn1",
    "Cc1ccc(NC(=O){A})cc1Nc1nccc(n1)c1cccnc1",
    "C=CC(=O)Nc1cc2c(Nc3ccc({X})cc3)ncnc2cc1O{B}",
    "{A}C(=O)Nc1ccc(Oc2ccnc3cc({S})ccc23)cc1",
    "O=C(N{B})c1cnn(c1){A}",
]

RING_DIGIT = re.compile(r"\d")


def renumber(fragment, offset):
    """Shift ring-closure digits of a fragment so they cannot collide with the scaffold."""
    out, depth = [], 0
    for ch in fragment:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if depth == 0 and RING_DIGIT.fullmatch(ch):
            ch = str(int(ch) + offset)
        out.append(ch)
    return "".join(out)


def expand(template, rng):
    slots = {
        "A": renumber(rng.choice(ARYL), 4),
        "B": renumber(rng.choice(ALKYL + ARYL), 6),
        "L": rng.choice(LINKER),
        "S": rng.choice(SMALL),
        "H": rng.choice(HEAD),
        "X": rng.choice(SMALL),
    }
    return template.format(**slots)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/corpus.csv")
    parser.add_argument("--count", type=int, default=500)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    families = [(t, "DIABETES") for t in DIABETES] + [(t, "LUNG CANCER") for t in LUNG_CANCER]
    seen, rows = set(), []
    for attempt in itertools.count():
        if len(rows) == args.count or attempt > 100 * args.count:
            break
        template, label = families[attempt % len(families)]
        smiles = expand(template, rng)
        if smiles in seen:
            continue
        seen.add(smiles)
        if rng.random() < 0.08:
            label = ""
        lo, hi = (4.0, 8.5) if label == "LUNG CANCER" else (3.0, 8.0)
        activity = "" if rng.random() < 0.1 else f"{rng.uniform(lo, hi):.2f}"
        rows.append((f"MOL{len(rows) + 1:04d}", smiles, label, activity))

    with open(args.out, "w", encoding="utf-8") as f:
        f.write("id,smiles,label,activity\n")
        for row in rows:
            f.write(",".join(row) + "\n")


if __name__ == "__main__":
    main()
