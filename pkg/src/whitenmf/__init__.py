"""Whitening-preprocessed sparse NMF for buried-object radar signatures."""

from .estimators import BuriedObjectClassifier, SparseNMF, Whitener
from .identify import (IdentificationModel, IdentificationResult,
                       build_model, evaluate, identify, rectify,
                       transductive_whiten)
from .model_io import load_model, save_model
from .signals import (BenchmarkSpec, Ensemble, Signal, load_ensemble,
                      ricker_wavelet, save_ensemble, synth_benchmark,
                      synth_ensemble, synth_trace, time_gate)
from .snmf import (Dictionary, SolverConfig, beta_divergence, fit_nmf,
                   objective, solve_activations, update_activations,
                   update_dictionary)
from .whitening import (cross_correlation, diagonality, estimate_moments,
                        sym_eig, whiten, whitening_matrix)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSpec", "BuriedObjectClassifier", "Dictionary", "Ensemble",
    "IdentificationModel", "IdentificationResult", "Signal", "SolverConfig",
    "SparseNMF", "Whitener", "beta_divergence", "build_model",
    "cross_correlation", "diagonality", "estimate_moments", "evaluate",
    "fit_nmf", "identify", "load_ensemble", "load_model", "objective",
    "rectify", "ricker_wavelet", "save_ensemble", "save_model",
    "solve_activations", "sym_eig", "synth_benchmark", "synth_ensemble",
    "synth_trace", "time_gate", "transductive_whiten", "update_activations",
    "update_dictionary", "whiten", "whitening_matrix",
]
