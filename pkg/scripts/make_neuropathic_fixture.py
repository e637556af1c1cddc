"""Regenerate the neuropathic-pain fixture (221 variables, 770 edges).

This is a synthetic stand-in built at the scale of the published
neuropathic-pain diagnosis network: a three-layer diagnostic DAG in which
discoligamentous injuries (pathophysiological layer) cause nerve-root
radiculopathies (pattern layer), which cause localized symptoms (symptom
layer).  The original simulator's exact edge list is not redistributed
here; node counts, edge count, layer structure, and naming style follow it.
See fixtures/README.md.

Usage: python scripts/make_neuropathic_fixture.py [--out DIR]
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

from causalbfs.dataset import Variable, VariableSet, save_metadata
from causalbfs.graph import CausalGraph

SEED = 770221
TARGET_NODES = 221
TARGET_EDGES = 770

CONTEXT = (
    "You are a helpful assistant to a neuropathic pain diagnosis expert. The "
    "following factors are key variables related to neuropathic pain diagnosis "
    "which have various causal effects on each other. Our goal is to construct "
    "a causal graph between these variables."
)

DISC_LEVELS = [
    "C2-C3", "C3-C4", "C4-C5", "C5-C6", "C6-C7", "C7-T1",
    "T12-L1", "L1-L2", "L2-L3", "L3-L4", "L4-L5", "L5-S1",
]

NERVE_ROOTS = ["C2", "C3", "C4", "C5", "C6", "C7", "C8", "T1",
               "L1", "L2", "L3", "L4", "L5", "S1"]

# Which disc levels can compromise each nerve root.
ROOT_SOURCES = {
    "C2": ["C2-C3"],
    "C3": ["C2-C3", "C3-C4"],
    "C4": ["C3-C4", "C4-C5"],
    "C5": ["C4-C5", "C5-C6"],
    "C6": ["C5-C6", "C6-C7"],
    "C7": ["C6-C7", "C7-T1"],
    "C8": ["C7-T1"],
    "T1": ["C7-T1"],
    "L1": ["T12-L1", "L1-L2"],
    "L2": ["L1-L2", "L2-L3"],
    "L3": ["L2-L3", "L3-L4"],
    "L4": ["L3-L4", "L4-L5"],
    "L5": ["L4-L5", "L5-S1"],
    "S1": ["L5-S1"],
}

SIDES = ["Right", "Left"]

LOCATIONS = [
    "neck", "shoulder", "upper arm", "elbow", "forearm", "wrist", "hand",
    "thumb", "index finger", "middle finger", "ring finger", "little finger",
    "scapula", "chest wall", "flank", "groin", "buttock", "hip", "thigh",
    "knee", "shin", "calf", "ankle", "foot", "heel", "big toe", "little toe",
]

QUALITIES = [
    ("pain", "Pain felt in the {side} {location}"),
    ("numbness", "Numbness felt in the {side} {location}"),
    ("tingling", "Tingling felt in the {side} {location}"),
    ("weakness", "Weakness of the {side} {location}"),
]


def build() -> tuple[VariableSet, CausalGraph]:
    rng = random.Random(SEED)

    patho = [(f"DLS {level}", f"Discoligamentous injury of the spine at the {level} segment")
             for level in DISC_LEVELS]
    patho.append(("Cervical spinal stenosis",
                  "Narrowing of the spinal canal in the cervical region"))
    patho.append(("Lumbar spinal stenosis",
                  "Narrowing of the spinal canal in the lumbar region"))

    pattern = []
    for side in SIDES:
        for root in NERVE_ROOTS:
            pattern.append(
                (f"{side} {root} radiculopathy",
                 f"Dysfunction of the {side.lower()} {root} nerve root")
            )

    symptom = []
    for quality, template in QUALITIES:
        for side in SIDES:
            for location in LOCATIONS:
                name = f"{side} {location} {quality}"
                symptom.append((name, template.format(side=side.lower(), location=location)))
    n_symptoms = TARGET_NODES - len(patho) - len(pattern)
    symptom = symptom[:n_symptoms]

    variables = tuple(Variable(n, d) for n, d in patho + pattern + symptom)
    vars = VariableSet(task_context=CONTEXT, variables=variables)
    assert len(vars) == TARGET_NODES, len(vars)

    graph = CausalGraph(vars.names)

    # Pathophysiology -> pattern: level-adjacent injuries plus stenosis.
    for side in SIDES:
        for root in NERVE_ROOTS:
            target = f"{side} {root} radiculopathy"
            for level in ROOT_SOURCES[root]:
                graph.add_edge(f"DLS {level}", target)
            stenosis = "Cervical spinal stenosis" if root.startswith(("C", "T")) else "Lumbar spinal stenosis"
            if rng.random() < 0.5:
                graph.add_edge(stenosis, target)

    # Pattern -> symptom: a few same-side radiculopathies per symptom.
    same_side = {
        side: [f"{side} {root} radiculopathy" for root in NERVE_ROOTS] for side in SIDES
    }
    for name, _ in symptom:
        side = name.split()[0]
        k = rng.randint(2, 5)
        for parent in rng.sample(same_side[side], k):
            graph.add_edge(parent, name)

    # Adjust to the exact published edge count.
    symptom_names = [name for name, _ in symptom]
    while len(graph.edges) < TARGET_EDGES:
        side = rng.choice(SIDES)
        graph.add_edge(rng.choice(same_side[side]),
                       rng.choice([s for s in symptom_names if s.startswith(side)]))
    assert len(graph.edges) == TARGET_EDGES, len(graph.edges)
    assert graph.is_dag()
    linked = {u for u, _ in graph.edges} | {v for _, v in graph.edges}
    assert linked == set(vars.names), "every variable should touch an edge"
    return vars, graph


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", default="src/causalbfs/fixtures", help="destination directory"
    )
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    vars, graph = build()
    save_metadata(vars, out / "neuropathic.json")
    (out / "neuropathic.edges").write_text(graph.to_edge_list(), encoding="utf-8")
    print(f"neuropathic: {len(vars)} variables, {len(graph.edges)} edges")


if __name__ == "__main__":
    main()
