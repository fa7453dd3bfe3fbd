"""Model persistence.

The model file stores only the raw labeled references plus configuration;
dictionary and whitening are re-derived deterministically on load, so a
round trip reproduces the in-process model bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .identify import IdentificationModel, build_model
from .signals import Ensemble, Signal
from .snmf import SolverConfig

FORMAT_VERSION = 1


def save_model(model: IdentificationModel, path) -> None:
    refs = model.references
    doc = {
        "format_version": FORMAT_VERSION,
        "whitening_method": model.whitening_method,
        "eig_floor": model.eig_floor,
        "solver": {
            "beta": model.solver.beta,
            "sparsity": model.solver.sparsity,
            "max_iters": model.solver.max_iters,
            "rel_tol": model.solver.rel_tol,
            "epsilon": model.solver.epsilon,
            "init": model.solver.init,
        },
        "dt": refs.dt,
        "references": [
            {"id": s.id, "label": s.label, "samples": s.samples.tolist()}
            for s in refs.signals
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> IdentificationModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version: {version!r}")
    solver = SolverConfig(**doc["solver"])
    dt = float(doc["dt"])
    refs = Ensemble([
        Signal(id=r["id"], label=r["label"],
               samples=np.asarray(r["samples"], dtype=np.float64), dt=dt)
        for r in doc["references"]
    ])
    return build_model(refs, doc["whitening_method"], solver,
                       float(doc["eig_floor"]))
