"""Sparse NMF with beta-divergence multiplicative updates.

Supervised solving keeps the dictionary fixed and iterates the activation
update; unsupervised fitting alternates activation and dictionary updates
with unit-norm atom renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

INIT_ONES = "ones"
INIT_WTM = "wtm"


class DegenerateAtomError(ValueError):
    """A dictionary atom collapsed to the zero vector."""


@dataclass(frozen=True)
class SolverConfig:
    beta: float = 1.0
    sparsity: float = 0.1
    max_iters: int = 500
    rel_tol: float = 1e-6
    epsilon: float = 1e-12
    init: str = INIT_WTM

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.rel_tol <= 0 or self.epsilon <= 0:
            raise ValueError("rel_tol and epsilon must be positive")
        if self.sparsity < 0:
            raise ValueError("sparsity must be non-negative")
        if self.init not in (INIT_ONES, INIT_WTM):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class Dictionary:
    """Non-negative atom matrix with unit-norm columns and per-atom labels."""

    matrix: np.ndarray          # F x M
    atom_labels: list[str]

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2:
            raise ValueError("dictionary matrix must be 2-D")
        if self.matrix.shape[1] != len(self.atom_labels):
            raise ValueError("atom count does not match label count")
        if np.any(self.matrix < 0) or not np.all(np.isfinite(self.matrix)):
            raise ValueError("dictionary entries must be finite and >= 0")
        norms = np.linalg.norm(self.matrix, axis=0)
        if np.any(norms == 0):
            bad = self.atom_labels[int(np.argmin(norms))]
            raise DegenerateAtomError(f"atom {bad!r} is the zero vector")
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ValueError("dictionary columns must have unit norm")

    @property
    def n_atoms(self):
        return self.matrix.shape[1]


def normalize_atoms(w, atom_labels):
    """Column-normalize w into a Dictionary; zero columns are an error."""
    w = np.asarray(w, dtype=np.float64)
    norms = np.linalg.norm(w, axis=0)
    if np.any(norms == 0):
        bad = atom_labels[int(np.argmin(norms))]
        raise DegenerateAtomError(f"atom {bad!r} is the zero vector")
    return Dictionary(matrix=w / norms, atom_labels=list(atom_labels))


def beta_divergence(x, y, beta):
    """Summed elementwise beta-divergence D_beta(x | y).

    beta = 1 is generalized KL, beta = 0 is Itakura-Saito, beta = 2 is half
    the squared Euclidean distance.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    if np.any(y <= 0):
        raise ValueError("y must be strictly positive (floor it first)")
    if beta == 1:
        return float(np.sum(xlogy(x, x) - xlogy(x, y) + y - x))
    if beta == 0:
        with np.errstate(divide="ignore"):
            r = x / y
            return float(np.sum(r - np.log(r) - 1.0))
    return float(np.sum(
        (x ** beta + (beta - 1.0) * y ** beta
         - beta * x * y ** (beta - 1.0)) / (beta * (beta - 1.0))))


def _check_shapes(m, w, h):
    if m.shape[0] != w.shape[0] or w.shape[1] != h.shape[0] \
            or m.shape[1] != h.shape[1]:
        raise ValueError(
            f"shape mismatch: M {m.shape}, W {w.shape}, H {h.shape}")


def objective(m, w, h, cfg: SolverConfig) -> float:
    """D_beta(M | WH) + sparsity * sum(H), reconstruction floored."""
    m = np.asarray(m, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    _check_shapes(m, w, h)
    recon = np.maximum(w @ h, cfg.epsilon)
    return beta_divergence(m, recon, cfg.beta) + cfg.sparsity * float(h.sum())


def update_activations(m, w, h, cfg: SolverConfig) -> np.ndarray:
    """One multiplicative activation step with the sparsity-augmented
    denominator."""
    m = np.asarray(m, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    _check_shapes(m, w, h)
    recon = np.maximum(w @ h, cfg.epsilon)
    num = w.T @ (m * recon ** (cfg.beta - 2.0))
    den = w.T @ recon ** (cfg.beta - 1.0) + cfg.sparsity
    return h * num / np.maximum(den, cfg.epsilon)


def solve_activations(m, w, cfg: SolverConfig = SolverConfig()):
    """Iterate the activation update to convergence with W fixed.

    Returns (H, trace) where trace holds the objective at initialization and
    after every iteration.
    """
    m = np.asarray(m, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if cfg.init == INIT_ONES:
        h = np.ones((w.shape[1], m.shape[1]))
    else:
        h = w.T @ m + cfg.epsilon
    trace = [objective(m, w, h, cfg)]
    for _ in range(cfg.max_iters):
        h = update_activations(m, w, h, cfg)
        trace.append(objective(m, w, h, cfg))
        if abs(trace[-2] - trace[-1]) \
                <= cfg.rel_tol * max(abs(trace[-2]), cfg.epsilon):
            break
    return h, trace


def update_dictionary(m, w, h, cfg: SolverConfig):
    """One multiplicative dictionary step, then unit-norm renormalization.

    Returns (W, H); each atom is rescaled to unit norm and the matching row
    of H absorbs the factor, leaving WH unchanged.
    """
    m = np.asarray(m, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    _check_shapes(m, w, h)
    recon = np.maximum(w @ h, cfg.epsilon)
    num = (m * recon ** (cfg.beta - 2.0)) @ h.T
    den = recon ** (cfg.beta - 1.0) @ h.T
    w = w * num / np.maximum(den, cfg.epsilon)
    norms = np.linalg.norm(w, axis=0)
    if np.any(norms == 0):
        raise DegenerateAtomError(
            f"atom {int(np.argmin(norms))} collapsed to zero")
    return w / norms, h * norms[:, None]


def fit_nmf(m, rank: int, cfg: SolverConfig = SolverConfig(), seed: int = 0):
    """Unsupervised factorization M ~ WH by alternating updates.

    Returns (W, H, trace); W has unit-norm columns.  Deterministic for a
    given seed.
    """
    m = np.asarray(m, dtype=np.float64)
    f, t = m.shape
    if not 1 <= rank <= min(f, t):
        raise ValueError(f"rank {rank} out of range [1, {min(f, t)}]")
    rng = np.random.default_rng(seed)
    w = rng.uniform(cfg.epsilon, 1.0, size=(f, rank))
    w /= np.linalg.norm(w, axis=0)
    h = rng.uniform(cfg.epsilon, 1.0, size=(rank, t))
    trace = [objective(m, w, h, cfg)]
    for _ in range(cfg.max_iters):
        h = update_activations(m, w, h, cfg)
        w, h = update_dictionary(m, w, h, cfg)
        trace.append(objective(m, w, h, cfg))
        if abs(trace[-2] - trace[-1]) \
                <= cfg.rel_tol * max(abs(trace[-2]), cfg.epsilon):
            break
    return w, h, trace
