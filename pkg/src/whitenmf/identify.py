"""End-to-end identification: whitened dictionary building, transductive
query whitening, sparse activation solving, and the label decision."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import Ensemble, Signal
from .snmf import Dictionary, SolverConfig, normalize_atoms, solve_activations
from .whitening import (DEFAULT_EIG_FLOOR, WhiteningModel, cross_correlation,
                        estimate_moments, whiten, whitening_matrix)

INDETERMINATE = "indeterminate"


@dataclass
class IdentificationModel:
    references: Ensemble
    whitening_method: str
    solver: SolverConfig
    eig_floor: float
    whitening: WhiteningModel
    dictionary: Dictionary          # rectified whitened references
    raw_dictionary: Dictionary      # rectified unwhitened references

    @property
    def labels(self):
        return self.references.labels


@dataclass
class IdentificationResult:
    scores: dict[str, float]
    winner: str
    margin: float
    activations: np.ndarray


@dataclass
class EvaluationReport:
    labels: list[str]               # row/column order of the confusion matrix
    confusion: np.ndarray
    accuracy: float


def rectify(e: Ensemble) -> np.ndarray:
    """Absolute-value matrix with time samples as rows, signals as columns."""
    return np.abs(e.matrix().T)


def build_model(refs: Ensemble, method: str = "zca",
                solver: SolverConfig = SolverConfig(),
                eig_floor: float = DEFAULT_EIG_FLOOR) -> IdentificationModel:
    """Fit whitening on the references and build both dictionaries."""
    if refs.d < 2:
        raise ValueError("need at least 2 reference signals")
    if any(not s.label for s in refs.signals):
        raise ValueError("every reference signal needs a label")
    wm = whitening_matrix(method, estimate_moments(refs), eig_floor)
    dictionary = normalize_atoms(rectify(whiten(refs, wm)), refs.labels)
    raw = normalize_atoms(rectify(refs), refs.labels)
    return IdentificationModel(references=refs, whitening_method=method,
                               solver=solver, eig_floor=eig_floor,
                               whitening=wm, dictionary=dictionary,
                               raw_dictionary=raw)


def transductive_whiten(query: Signal,
                        model: IdentificationModel) -> Signal:
    """Whiten the query jointly with the references.

    The whitening transform is re-fit on the (d+1)-signal ensemble of
    references plus query; the whitened query is returned and the model is
    left untouched.
    """
    refs = model.references
    if query.n != refs.n:
        raise ValueError(
            f"query {query.id!r} has length {query.n}, expected {refs.n}")
    aug = Ensemble(refs.signals + [query])
    wm = whitening_matrix(model.whitening_method, estimate_moments(aug),
                          model.eig_floor)
    return whiten(aug, wm).signals[-1]


def _decide(h: np.ndarray, atom_labels) -> tuple[dict, str, float]:
    scores = {}
    for label in sorted(set(atom_labels)):
        idx = [i for i, lab in enumerate(atom_labels) if lab == label]
        scores[label] = float(h[idx].sum())
    total = sum(scores.values())
    if total <= 0:
        return scores, INDETERMINATE, 0.0
    top = max(scores.values())
    winners = [lab for lab, v in scores.items() if v == top]
    winner = min(winners)
    others = [v for lab, v in scores.items() if lab != winner]
    if not others:
        return scores, winner, 1.0
    margin = (top - max(others)) / top
    return scores, winner, margin


def identify(query: Signal, model: IdentificationModel,
             use_whitening: bool = True) -> IdentificationResult:
    """Score the query against the dictionary and pick the winning label."""
    if query.n != model.references.n:
        raise ValueError(
            f"query {query.id!r} has length {query.n}, "
            f"expected {model.references.n}")
    if use_whitening:
        column = np.abs(transductive_whiten(query, model).samples)
        dictionary = model.dictionary
    else:
        column = np.abs(query.samples)
        dictionary = model.raw_dictionary
    h, _ = solve_activations(column[:, None], dictionary.matrix, model.solver)
    scores, winner, margin = _decide(h, dictionary.atom_labels)
    return IdentificationResult(scores=scores, winner=winner, margin=margin,
                                activations=h)


def evaluate(test: Ensemble, model: IdentificationModel,
             use_whitening: bool = True) -> EvaluationReport:
    """Confusion matrix (true rows, predicted columns) and accuracy."""
    known = sorted(set(model.labels))
    for s in test.signals:
        if s.label not in known:
            raise ValueError(f"unknown label {s.label!r} in test ensemble")
    order = known + [INDETERMINATE]
    index = {lab: i for i, lab in enumerate(order)}
    confusion = np.zeros((len(order), len(order)), dtype=np.int64)
    for s in test.signals:
        result = identify(s, model, use_whitening=use_whitening)
        confusion[index[s.label], index[result.winner]] += 1
    accuracy = float(np.trace(confusion)) / test.d
    return EvaluationReport(labels=order, confusion=confusion,
                            accuracy=accuracy)
