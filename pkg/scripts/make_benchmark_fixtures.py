"""Regenerate the asia/child fixture files checked into causalbfs/fixtures.

The graph structures are the published ASIA (8 nodes, 8 edges) and CHILD
(20 nodes, 25 edges) Bayesian networks.  ASIA samples are drawn from the
classic published conditional probability tables; CHILD samples are drawn
from the true structure with a seeded synthetic parameterization (the
published CHILD tables are not reproduced here), so its correlations are
illustrative rather than bnlearn-exact.  Categorical levels are encoded as
integer codes starting at 0; binary variables are 0/1.

Usage: python scripts/make_benchmark_fixtures.py [--out DIR]
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

import numpy as np

from causalbfs.dataset import Variable, VariableSet, save_metadata
from causalbfs.graph import CausalGraph

ASIA_CONTEXT = (
    "You are a helpful assistant to a chest clinic doctor investigating lung "
    "disease in patients who may have recently visited Asia. The following "
    "factors are key variables related to the diagnosis of lung disease which "
    "have various causal effects on each other. Our goal is to construct a "
    "causal graph between these variables."
)

ASIA_VARIABLES = [
    ("asia", "Whether the patient has recently visited a country in Asia with a high tuberculosis prevalence"),
    ("tub", "Whether the patient has tuberculosis"),
    ("smoke", "Whether the patient is a smoker"),
    ("lung", "Whether the patient has lung cancer"),
    ("bronc", "Whether the patient has bronchitis"),
    ("either", "Whether the patient has either tuberculosis or lung cancer"),
    ("xray", "Whether the patient's chest X-ray shows an abnormal result"),
    ("dysp", "Whether the patient suffers from dyspnoea, i.e. shortness of breath"),
]

ASIA_EDGES = [
    ("asia", "tub"),
    ("smoke", "lung"),
    ("smoke", "bronc"),
    ("tub", "either"),
    ("lung", "either"),
    ("either", "xray"),
    ("either", "dysp"),
    ("bronc", "dysp"),
]

CHILD_CONTEXT = (
    "You are a helpful assistant to a pediatric cardiologist assessing newborn "
    "babies for congenital heart disease. The following factors are key "
    "variables related to congenital heart disease in newborns which have "
    "various causal effects on each other. Our goal is to construct a causal "
    "graph between these variables."
)

CHILD_VARIABLES = [
    ("BirthAsphyxia", "Lack of oxygen to the blood during the infant's birth"),
    ("Disease", "The category of congenital heart disease affecting the newborn"),
    ("Age", "Age of the infant at presentation"),
    ("LVH", "Thickening of the left ventricle of the heart"),
    ("DuctFlow", "Direction of blood flow across the ductus arteriosus"),
    ("CardiacMixing", "Degree of mixing between oxygenated and deoxygenated blood in the heart"),
    ("LungParench", "State of the blood vessels and tissue of the lung parenchyma"),
    ("LungFlow", "Level of blood flow through the lungs"),
    ("Sick", "Whether the infant appears generally sick"),
    ("HypDistrib", "Whether low oxygen saturation is distributed unequally between the upper and lower body"),
    ("HypoxiaInO2", "Severity of hypoxia while the infant breathes supplemental oxygen"),
    ("CO2", "Level of carbon dioxide in the infant's blood"),
    ("ChestXray", "Appearance of the lungs on the chest X-ray"),
    ("Grunting", "Whether the infant is grunting while breathing"),
    ("LVHreport", "Whether left ventricular hypertrophy is reported on the echocardiogram"),
    ("LowerBodyO2", "Oxygen saturation measured in the lower body"),
    ("RUQO2", "Oxygen saturation measured in the right upper quadrant of the body"),
    ("CO2Report", "Whether the blood gas report shows elevated carbon dioxide"),
    ("XrayReport", "The radiologist's report of the chest X-ray"),
    ("GruntingReport", "Whether grunting is reported by the parents or nursing staff"),
]

CHILD_EDGES = [
    ("BirthAsphyxia", "Disease"),
    ("Disease", "Age"),
    ("Sick", "Age"),
    ("Disease", "LVH"),
    ("Disease", "DuctFlow"),
    ("Disease", "CardiacMixing"),
    ("Disease", "LungParench"),
    ("Disease", "LungFlow"),
    ("Disease", "Sick"),
    ("DuctFlow", "HypDistrib"),
    ("CardiacMixing", "HypDistrib"),
    ("CardiacMixing", "HypoxiaInO2"),
    ("LungParench", "HypoxiaInO2"),
    ("LungParench", "CO2"),
    ("LungParench", "ChestXray"),
    ("LungFlow", "ChestXray"),
    ("LungParench", "Grunting"),
    ("Sick", "Grunting"),
    ("LVH", "LVHreport"),
    ("HypDistrib", "LowerBodyO2"),
    ("HypoxiaInO2", "LowerBodyO2"),
    ("HypoxiaInO2", "RUQO2"),
    ("CO2", "CO2Report"),
    ("ChestXray", "XrayReport"),
    ("Grunting", "GruntingReport"),
]

CHILD_ARITY = {
    "BirthAsphyxia": 2,
    "Disease": 6,
    "Age": 3,
    "LVH": 2,
    "DuctFlow": 3,
    "CardiacMixing": 4,
    "LungParench": 3,
    "LungFlow": 3,
    "Sick": 2,
    "HypDistrib": 2,
    "HypoxiaInO2": 3,
    "CO2": 3,
    "ChestXray": 5,
    "Grunting": 2,
    "LVHreport": 2,
    "LowerBodyO2": 3,
    "RUQO2": 3,
    "CO2Report": 2,
    "XrayReport": 5,
    "GruntingReport": 2,
}

SAMPLE_SIZES = (100, 1000, 10000)


def sample_asia(n_rows: int, seed: int) -> list[dict[str, int]]:
    """Ancestral sampling from the classic ASIA tables (yes=1, no=0)."""
    rng = random.Random(seed)
    rows = []
    for _ in range(n_rows):
        asia = int(rng.random() < 0.01)
        tub = int(rng.random() < (0.05 if asia else 0.01))
        smoke = int(rng.random() < 0.5)
        lung = int(rng.random() < (0.10 if smoke else 0.01))
        bronc = int(rng.random() < (0.60 if smoke else 0.30))
        either = int(tub or lung)
        xray = int(rng.random() < (0.98 if either else 0.05))
        dysp_p = {(1, 1): 0.9, (1, 0): 0.7, (0, 1): 0.8, (0, 0): 0.1}[(either, bronc)]
        dysp = int(rng.random() < dysp_p)
        rows.append(
            dict(asia=asia, tub=tub, smoke=smoke, lung=lung, bronc=bronc,
                 either=either, xray=xray, dysp=dysp)
        )
    return rows


def sample_child(n_rows: int, seed: int) -> list[dict[str, int]]:
    """Ancestral sampling from the true structure with seeded Dirichlet CPTs."""
    rng = np.random.default_rng(seed)
    parents: dict[str, list[str]] = {name: [] for name, _ in CHILD_VARIABLES}
    for u, v in CHILD_EDGES:
        parents[v].append(u)
    # Topological order: parents always precede children in this listing
    # except Sick -> Age and Sick -> Grunting, so order by dependency.
    order: list[str] = []
    pending = {name for name, _ in CHILD_VARIABLES}
    while pending:
        for name, _ in CHILD_VARIABLES:
            if name in pending and all(p not in pending for p in parents[name]):
                order.append(name)
                pending.remove(name)
    cpts: dict[str, dict[tuple[int, ...], np.ndarray]] = {}
    for name in order:
        arity = CHILD_ARITY[name]
        table = {}
        shapes = [CHILD_ARITY[p] for p in parents[name]]
        for combo in np.ndindex(*shapes) if shapes else [()]:
            table[tuple(combo)] = rng.dirichlet([0.4] * arity)
        cpts[name] = table
    rows = []
    for _ in range(n_rows):
        row: dict[str, int] = {}
        for name in order:
            combo = tuple(row[p] for p in parents[name])
            probs = cpts[name][combo]
            row[name] = int(rng.choice(CHILD_ARITY[name], p=probs))
        rows.append(row)
    return rows


def write_csv(path: Path, names: list[str], rows: list[dict[str, int]]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(str(row[name]) for name in names) + "\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", default="src/causalbfs/fixtures", help="destination directory"
    )
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for label, context, variables, edges, sampler in (
        ("asia", ASIA_CONTEXT, ASIA_VARIABLES, ASIA_EDGES, sample_asia),
        ("child", CHILD_CONTEXT, CHILD_VARIABLES, CHILD_EDGES, sample_child),
    ):
        vars = VariableSet(
            task_context=context,
            variables=tuple(Variable(n, d) for n, d in variables),
        )
        save_metadata(vars, out / f"{label}.json")
        graph = CausalGraph(vars.names)
        for u, v in edges:
            assert graph.add_edge_checked(u, v).value == "added"
        assert graph.is_dag()
        (out / f"{label}.edges").write_text(graph.to_edge_list(), encoding="utf-8")
        names = list(vars.names)
        base_seed = {"asia": 1100, "child": 2300}[label]
        for size in SAMPLE_SIZES:
            rows = sampler(size, seed=base_seed + size)
            write_csv(out / f"{label}_{size}.csv", names, rows)
        print(f"{label}: {len(vars)} variables, {len(graph.edges)} edges, "
              f"samples {SAMPLE_SIZES}")


if __name__ == "__main__":
    main()
