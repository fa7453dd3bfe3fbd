"""Radar trace data model, synthetic benchmark generation, time gating, CSV I/O.

A trace is a single T1R1 time-domain return.  An ensemble stacks d traces of
equal length into the d-by-n matrix consumed by the whitening stage.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

C0 = 299792458.0
SOIL_RELATIVE_PERMITTIVITY = 4.0
# propagation speed in soil; sets the two-way echo-delay scale
V_SOIL = C0 / math.sqrt(SOIL_RELATIVE_PERMITTIVITY)

# 8 GHz sweep in 20 MHz steps -> 401 frequency points -> 401-sample trace
DEFAULT_N_SAMPLES = 401
DEFAULT_DT = 1.0 / 8e9  # 0.125 ns
DEFAULT_CENTER_FREQ = 2e9
DEFAULT_SEED = 1234

GROUND_BOUNCE_DELAY = 3e-9
# echoes from burial depths of roughly 0.5 to 2.4 m at v = c/2
ECHO_WINDOW = (GROUND_BOUNCE_DELAY + 2 * 0.5 / V_SOIL,
               GROUND_BOUNCE_DELAY + 2 * 2.4 / V_SOIL)
ECHOES_PER_CLASS = 2
# echo-pattern scale relative to the unit-norm templates; keeps the class
# signature well above the default noise floor while the ground bounce
# remains the dominant single feature
TEMPLATE_AMPLITUDE = 5.0

TARGET_LABELS = (
    "mine_a", "mine_b", "mine_c", "mine_d", "mine_e", "mine_f",
    "mine_simulant", "sphere", "rock", "crushed_can", "cylinder", "vacant",
)


class ParseError(ValueError):
    """Malformed ensemble CSV; message carries the offending line number."""


def class_label(class_index):
    if class_index < len(TARGET_LABELS):
        return TARGET_LABELS[class_index]
    return f"class_{class_index}"


@dataclass
class Signal:
    """One real-valued time trace with a class label."""

    id: str
    label: str
    samples: np.ndarray
    dt: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise ValueError(f"signal {self.id!r}: need at least 2 samples")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError(f"signal {self.id!r}: non-finite sample")
        if not (self.dt > 0):
            raise ValueError(f"signal {self.id!r}: dt must be positive")

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return (self.id == other.id and self.label == other.label
                and self.dt == other.dt
                and np.array_equal(self.samples, other.samples))

    @property
    def n(self):
        return self.samples.size

    def times(self):
        return np.arange(self.n) * self.dt


@dataclass
class Ensemble:
    """Ordered stack of equal-length signals; index-addressable."""

    signals: list[Signal]

    def __post_init__(self):
        if not self.signals:
            raise ValueError("ensemble must contain at least one signal")
        n0, dt0 = self.signals[0].n, self.signals[0].dt
        for s in self.signals:
            if s.n != n0:
                raise ValueError(
                    f"signal {s.id!r} has length {s.n}, expected {n0}")
            if s.dt != dt0:
                raise ValueError(
                    f"signal {s.id!r} has dt {s.dt}, expected {dt0}")

    def __eq__(self, other):
        if not isinstance(other, Ensemble):
            return NotImplemented
        return self.signals == other.signals

    def __len__(self):
        return len(self.signals)

    @property
    def d(self):
        return len(self.signals)

    @property
    def n(self):
        return self.signals[0].n

    @property
    def dt(self):
        return self.signals[0].dt

    @property
    def labels(self):
        return [s.label for s in self.signals]

    @property
    def ids(self):
        return [s.id for s in self.signals]

    def matrix(self):
        """d-by-n array, one signal per row."""
        return np.stack([s.samples for s in self.signals])


@dataclass(frozen=True)
class BenchmarkSpec:
    """Parameters of the synthetic desk-scale benchmark generator."""

    n_classes: int = 12
    traces_per_class: int = 2
    similarity: float = 0.95
    noise_sigma: float = 0.01
    ground_bounce_amplitude: float = 5.0
    seed: int = DEFAULT_SEED
    n_samples: int = DEFAULT_N_SAMPLES
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("n_classes must be at least 2")
        if self.traces_per_class < 2:
            raise ValueError("traces_per_class must be at least 2")
        if not (0 <= self.similarity < 1):
            raise ValueError("similarity must be in [0, 1)")
        if self.noise_sigma < 0 or self.ground_bounce_amplitude < 0:
            raise ValueError("noise_sigma and ground_bounce_amplitude "
                             "must be non-negative")


def ricker_wavelet(fc, t):
    """Ricker pulse with center frequency fc, peak 1 at t = 0."""
    a = (math.pi * fc) ** 2 * np.square(t)
    return (1.0 - 2.0 * a) * np.exp(-a)


def _unit(v):
    nrm = np.linalg.norm(v)
    return v / nrm if nrm > 0 else v


def _echo_sum(t, rng, lo, hi, count):
    out = np.zeros_like(t)
    for _ in range(count):
        delay = rng.uniform(lo, hi)
        amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
        out += amp * ricker_wavelet(DEFAULT_CENTER_FREQ, t - delay)
    return out


@functools.lru_cache(maxsize=16)
def class_templates(spec: BenchmarkSpec) -> np.ndarray:
    """Unit-norm class templates, one row per class.

    Each class draws its echo delays from a private slot of the echo window,
    so templates of different classes have (near-)disjoint support.  For
    similarity > 0 a shared base template is mixed in so that the pairwise
    template correlation is approximately `similarity`.
    """
    t = np.arange(spec.n_samples) * spec.dt
    lo, hi = ECHO_WINDOW
    hi = min(hi, t[-1] - 5.0 / DEFAULT_CENTER_FREQ)
    shared = _unit(_echo_sum(t, np.random.default_rng([spec.seed, 0]),
                             lo, hi, 3))
    slot = (hi - lo) / spec.n_classes
    rows = []
    for c in range(spec.n_classes):
        rng = np.random.default_rng([spec.seed, 1, c])
        pad = 0.2 * slot
        unique = _unit(_echo_sum(t, rng, lo + c * slot + pad,
                                 lo + (c + 1) * slot - pad,
                                 ECHOES_PER_CLASS))
        if spec.similarity > 0:
            unique = _unit(unique - np.dot(unique, shared) * shared)
            tmpl = (math.sqrt(1.0 - spec.similarity) * unique
                    + math.sqrt(spec.similarity) * shared)
        else:
            tmpl = unique
        rows.append(tmpl)
    return np.stack(rows)


def template_correlations(spec: BenchmarkSpec) -> np.ndarray:
    """Pairwise Pearson correlation matrix of the class templates."""
    return np.corrcoef(class_templates(spec))


def mean_template_correlation(spec: BenchmarkSpec) -> float:
    corr = template_correlations(spec)
    off = corr[~np.eye(spec.n_classes, dtype=bool)]
    return float(np.mean(off))


def synth_trace(spec: BenchmarkSpec, class_index: int,
                instance_index: int) -> Signal:
    """Deterministic synthetic trace for one class instance."""
    if not 0 <= class_index < spec.n_classes:
        raise ValueError(
            f"class_index {class_index} out of range [0, {spec.n_classes})")
    t = np.arange(spec.n_samples) * spec.dt
    trace = TEMPLATE_AMPLITUDE * class_templates(spec)[class_index]
    trace += spec.ground_bounce_amplitude * ricker_wavelet(
        DEFAULT_CENTER_FREQ, t - GROUND_BOUNCE_DELAY)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng([spec.seed, 2, class_index,
                                     instance_index])
        trace += spec.noise_sigma * rng.standard_normal(spec.n_samples)
    return Signal(id=f"c{class_index:02d}_i{instance_index:02d}",
                  label=class_label(class_index),
                  samples=trace, dt=spec.dt)


def synth_ensemble(spec: BenchmarkSpec, instance_index: int) -> Ensemble:
    return Ensemble([synth_trace(spec, c, instance_index)
                     for c in range(spec.n_classes)])


def synth_benchmark(spec: BenchmarkSpec):
    """(train, test): instance 0 of each class vs. all held-out instances."""
    train = synth_ensemble(spec, 0)
    test = Ensemble([synth_trace(spec, c, i)
                     for i in range(1, spec.traces_per_class)
                     for c in range(spec.n_classes)])
    return train, test


def time_gate(s: Signal, t_start: float, t_end: float) -> Signal:
    """Zero all samples whose time falls outside [t_start, t_end)."""
    if not (0 <= t_start < t_end):
        raise ValueError(f"invalid gate [{t_start}, {t_end})")
    times = s.times()
    mask = (times >= t_start) & (times < t_end)
    return Signal(id=s.id, label=s.label, samples=s.samples * mask, dt=s.dt)


def save_ensemble(e: Ensemble, path) -> None:
    """Write CSV: comment line with dt, header, one signal per row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dt={e.dt:.17g}\n")
        cols = ",".join(f"s{i}" for i in range(e.n))
        fh.write(f"id,label,{cols}\n")
        for s in e.signals:
            vals = ",".join(f"{v:.17g}" for v in s.samples)
            fh.write(f"{s.id},{s.label},{vals}\n")


def load_ensemble(path) -> Ensemble:
    """Read an ensemble CSV written by save_ensemble."""
    dt = DEFAULT_DT
    signals = []
    expected = None
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    lineno = 0
    rows = []
    for raw in lines:
        lineno += 1
        if raw.startswith("#"):
            stripped = raw.lstrip("#").strip()
            if stripped.startswith("dt="):
                try:
                    dt = float(stripped[3:])
                except ValueError:
                    raise ParseError(f"line {lineno}: bad dt value") from None
            continue
        rows.append((lineno, raw))
    if not rows:
        raise ParseError("empty ensemble file")
    header_no, header = rows[0]
    fields = header.split(",")
    if len(fields) < 4 or fields[0] != "id" or fields[1] != "label":
        raise ParseError(f"line {header_no}: expected header id,label,s0,...")
    expected = len(fields) - 2
    for lineno, raw in rows[1:]:
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) - 2 != expected:
            raise ParseError(
                f"line {lineno}: expected {expected} samples, "
                f"got {len(parts) - 2}")
        sid, label = parts[0], parts[1]
        samples = np.empty(expected)
        for j, cell in enumerate(parts[2:]):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"line {lineno}: column s{j}: not a number: "
                    f"{cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(
                    f"line {lineno}: column s{j}: non-finite value {cell!r}")
            samples[j] = v
        signals.append(Signal(id=sid, label=label, samples=samples, dt=dt))
    if not signals:
        raise ParseError("ensemble file contains no signal rows")
    return Ensemble(signals)
