"""Photon-counting simulation of the PZT voltage sweep and its analysis.

Imperfections are scalar: fringe visibility (mixing toward the phase-averaged
distribution), extinction (symmetric detector cross-talk), a linear fiber
coupling drift with voltage, and an optional multiplicative background for
multi-photon accidentals.

Each grid point draws from its own Philox stream keyed by
``(seed, oracle, point index)``, so a sweep is reproducible regardless of the
order in which points are evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .deutsch import FunctionClass, run_deutsch
from .optics import OracleKind
from .qcore import PolProbs

SOURCE_RATE = 150_000.0
TWO_PHOTON_PROB = 2.5e-4

_KIND_INDEX = {k: i for i, k in enumerate(OracleKind)}


class InvalidConfigError(ValueError):
    pass


class UndefinedContrastError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    rate: float = SOURCE_RATE
    integration_time: float = 1.0
    v_start: float = 0.0
    v_end: float = 34.0
    v_step: float = 1.0
    volts_per_period: float = 17.0
    phase_offset: float = 0.0
    visibility: float = 1.0
    extinction: float = 0.0
    drift_per_volt: float = 0.0
    background_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("rate", "integration_time", "v_start", "v_end", "v_step", "volts_per_period",
                     "phase_offset", "visibility", "extinction", "drift_per_volt", "background_prob"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfigError(f"{name} must be finite")
        if self.v_step <= 0:
            raise InvalidConfigError(f"v_step must be > 0, got {self.v_step}")
        if self.v_end < self.v_start:
            raise InvalidConfigError("v_end must be >= v_start")
        if self.volts_per_period <= 0:
            raise InvalidConfigError("volts_per_period must be > 0")
        if self.rate < 0 or self.integration_time < 0:
            raise InvalidConfigError("rate and integration_time must be >= 0")
        if not 0.0 <= self.visibility <= 1.0:
            raise InvalidConfigError("visibility must lie in [0, 1]")
        if not 0.0 <= self.extinction <= 0.5:
            raise InvalidConfigError("extinction must lie in [0, 0.5]")
        if self.drift_per_volt < 0:
            raise InvalidConfigError("drift_per_volt must be >= 0")
        if not 0.0 <= self.background_prob < 1.0:
            raise InvalidConfigError("background_prob must lie in [0, 1)")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidConfigError("seed must be a non-negative integer")

    def with_(self, **changes) -> "SweepConfig":
        return replace(self, **changes)

    def grid(self) -> np.ndarray:
        n = int(math.floor((self.v_end - self.v_start) / self.v_step + 1e-9)) + 1
        if n < 1:
            raise InvalidConfigError("voltage grid is empty")
        return self.v_start + self.v_step * np.arange(n)


@dataclass(frozen=True)
class DetectionRecord:
    voltage: float
    phase: float
    counts_d1: int
    counts_d2: int


@dataclass(frozen=True)
class ContrastReport:
    eta: float
    eta_std: float
    n_points: int


@dataclass(frozen=True)
class FringeFit:
    """Fit of counts to ``g(v) * a * (1 - nu * cos(2 pi v / T + delta))``."""

    visibility: float
    offset: float
    phase: float
    amplitude: float
    amplitude_se: float
    flat: bool

    def __float__(self):
        return self.visibility

    def model(self, v, cfg: SweepConfig):
        v = np.asarray(v, dtype=float)
        w = 2.0 * np.pi / cfg.volts_per_period
        return coupling(v, cfg) * self.offset * (1.0 - self.visibility * np.cos(w * v + self.phase))


def voltage_to_phase(v: float, cfg: SweepConfig) -> float:
    return 2.0 * math.pi * v / cfg.volts_per_period + cfg.phase_offset


def coupling(v, cfg: SweepConfig):
    """Fiber coupling efficiency g(v) = max(0, 1 - drift * v)."""
    return np.maximum(0.0, 1.0 - cfg.drift_per_volt * np.asarray(v, dtype=float))


def detection_probs(kind: OracleKind, phi: float, cfg: SweepConfig) -> PolProbs:
    ideal = run_deutsch(kind, phi).probs
    p_h, p_v = ideal.p_h, ideal.p_v
    if kind.is_balanced:
        nu = cfg.visibility
        p_h = nu * p_h + (1.0 - nu) * 0.5
        p_v = nu * p_v + (1.0 - nu) * 0.5
    eps = cfg.extinction
    p_h, p_v = (1.0 - eps) * p_h + eps * p_v, (1.0 - eps) * p_v + eps * p_h
    total = p_h + p_v
    return PolProbs(p_v=p_v / total, p_h=p_h / total)


def expected_counts(kind: OracleKind, v: float, cfg: SweepConfig) -> tuple[float, float]:
    """Mean counts (D1, D2) at voltage ``v``."""
    probs = detection_probs(kind, voltage_to_phase(v, cfg), cfg)
    scale = cfg.rate * cfg.integration_time * float(coupling(v, cfg)) * (1.0 + cfg.background_prob)
    return scale * probs.p_h, scale * probs.p_v


def point_stream(seed: int, kind: OracleKind, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), _KIND_INDEX[kind], int(index)])))


def sample_counts(kind: OracleKind, v: float, cfg: SweepConfig, rng: np.random.Generator) -> DetectionRecord:
    mu1, mu2 = expected_counts(kind, v, cfg)
    c1, c2 = rng.poisson([mu1, mu2])
    return DetectionRecord(float(v), voltage_to_phase(v, cfg), int(c1), int(c2))


def simulate_sweep(kind: OracleKind, cfg: SweepConfig, *, noiseless: bool = False) -> list[DetectionRecord]:
    """One record per grid voltage.

    With ``noiseless=True`` the records carry the (float) expected counts
    instead of Poisson draws.
    """
    records = []
    for i, v in enumerate(cfg.grid()):
        if noiseless:
            mu1, mu2 = expected_counts(kind, v, cfg)
            records.append(DetectionRecord(float(v), voltage_to_phase(v, cfg), mu1, mu2))
        else:
            records.append(sample_counts(kind, v, cfg, point_stream(cfg.seed, kind, i)))
    return records


def contrast_ratio(c1, c2) -> ContrastReport:
    """eta = |C1 - C2| / (C1 + C2), with Poisson error propagation.

    Accepts single counts or sequences (summed over points).
    """
    n_points = int(np.size(c1))
    c1 = float(np.sum(c1))
    c2 = float(np.sum(c2))
    total = c1 + c2
    if total <= 0:
        raise UndefinedContrastError("contrast undefined for zero total counts")
    eta = abs(c1 - c2) / total
    eta_std = 2.0 * math.sqrt(c1 * c2 * total) / total**2
    return ContrastReport(eta=eta, eta_std=eta_std, n_points=n_points)


def fit_fringe(voltages, counts, cfg: SweepConfig, *, flat_sigma: float = 5.0) -> FringeFit:
    """Least-squares fringe fit with the coupling drift fixed from ``cfg``.

    The model is linear in (A, B, C) once written as
    ``g(v) * (A + B cos(wv) + C sin(wv))``; visibility is hypot(B, C) / A.
    The signal is flagged flat when the fringe amplitude is below
    ``flat_sigma`` shot-noise standard errors.
    """
    v = np.asarray(voltages, dtype=float)
    y = np.asarray(counts, dtype=float)
    if v.size < 8:
        raise ValueError("need at least 8 records to fit a fringe")
    if v.max() - v.min() < cfg.volts_per_period * (1.0 - 1e-9):
        raise ValueError("records must span at least one phase period")
    g = coupling(v, cfg)
    w = 2.0 * np.pi / cfg.volts_per_period
    design = np.column_stack([g, g * np.cos(w * v), g * np.sin(w * v)])
    (a, b, c), *_ = np.linalg.lstsq(design, y, rcond=None)
    amplitude = math.hypot(b, c)
    # shot-noise standard error of the cos/sin coefficients
    gm = g[g > 0]
    mean_rate = max(float(np.mean(y[g > 0] / gm**2)) if gm.size else 0.0, 1.0)
    amplitude_se = math.sqrt(2.0 * mean_rate / v.size)
    a, amplitude = float(a), float(amplitude)
    if a <= 0 or amplitude < flat_sigma * amplitude_se:
        return FringeFit(0.0, max(a, 0.0), 0.0, amplitude, amplitude_se, True)
    # -nu*a*cos(wv + delta) = B cos(wv) + C sin(wv)  =>  B = -nu a cos(delta), C = nu a sin(delta)
    delta = math.atan2(c, -b)
    nu = min(1.0, amplitude / a)
    return FringeFit(nu, a, delta, amplitude, amplitude_se, False)


def fit_visibility(records, cfg: SweepConfig) -> FringeFit:
    """Visibility of the D1 fringe; ``float()`` of the result gives nu."""
    return fit_fringe([r.voltage for r in records], [r.counts_d1 for r in records], cfg)


def proper_phase_voltages(v_lo: float, v_hi: float, cfg: SweepConfig) -> list[float]:
    """Voltages in [v_lo, v_hi] where phi = (2N+1) pi."""
    t = cfg.volts_per_period
    # phi(v) = (2N+1) pi  <=>  v = ((2N+1) pi - offset) * T / (2 pi)
    n_lo = math.ceil((2 * math.pi * v_lo / t + cfg.phase_offset) / (2 * math.pi) - 0.5 - 1e-12)
    out = []
    n = n_lo
    while True:
        v = ((2 * n + 1) * math.pi - cfg.phase_offset) * t / (2 * math.pi)
        if v > v_hi + 1e-9:
            break
        if v >= v_lo - 1e-9:
            out.append(v)
        n += 1
    return out


def classify_counts(c1: float, c2: float, z: float = 5.0) -> FunctionClass:
    """Statistical class decision from counts taken at a proper phase.

    Balanced puts photons on D1 and constant on D2; the decision needs the
    D1 fraction to differ from 1/2 by more than ``z`` binomial standard errors.
    """
    n = c1 + c2
    if n <= 0:
        return FunctionClass.INDETERMINATE
    frac = c1 / n
    se = 0.5 / math.sqrt(n)
    if frac > 0.5 + z * se:
        return FunctionClass.BALANCED
    if frac < 0.5 - z * se:
        return FunctionClass.CONSTANT
    return FunctionClass.INDETERMINATE
