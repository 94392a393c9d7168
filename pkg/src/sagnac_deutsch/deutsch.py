"""Deutsch's algorithm on the optical model, plus the classical baseline.

Readout convention: D1 sees H, D2 sees V. At proper phases
``phi = (2N+1) pi`` a constant function sends the photon to D2 and a balanced
one to D1. (One passage describing the measured curves swaps D1 and D2; the
mapping above is the one consistent with the output states and the rest of
the experiment description.)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .optics import (
    OracleKind,
    SagnacConfig,
    beam_splitter_unitary,
    config_for,
    hwp_unitary,
    oracle_unitary,
    phase_shifter_unitary,
    sagnac_unitary,
)
from .qcore import PolProbs, StateVector, Unitary4, apply_unitary, pol_marginal

DEFAULT_CLASSIFY_TOL = 1e-6
HADAMARD_ANGLE = 22.5


class ConfigurationError(ValueError):
    pass


class FunctionClass(enum.Enum):
    CONSTANT = "Constant"
    BALANCED = "Balanced"
    INDETERMINATE = "Indeterminate"


class PrepMode(enum.Enum):
    DIRECT = "direct"
    COMPOSED = "composed"


IDEAL = "ideal"


@dataclass
class Oracle:
    """Black-box access to f that counts every query."""

    kind: OracleKind
    unitary: Unitary4
    queries: int = 0

    def apply(self, state: StateVector) -> StateVector:
        self.queries += 1
        return apply_unitary(self.unitary, state)

    def evaluate(self, x: int) -> int:
        self.queries += 1
        return self.kind.f(x)


@dataclass(frozen=True)
class DeutschOutcome:
    kind: OracleKind
    output_state: StateVector
    probs: PolProbs
    phi: float
    gate_source: str = IDEAL
    oracle_queries: int = field(default=1)


def prepare_input(phi: float, mode: PrepMode = PrepMode.DIRECT) -> StateVector:
    """State after HWP2: (|V> + |H>)(|l> + e^{i phi}|r>)/2."""
    if not np.isfinite(phi):
        raise ValueError("phase must be finite")
    if mode is PrepMode.DIRECT:
        e = np.exp(1j * phi)
        return StateVector(np.array([1.0, e, 1.0, e]) / 2.0)
    s = StateVector.basis(0)  # |V, l> after the polarizer
    for u in (beam_splitter_unitary(), phase_shifter_unitary(phi), hwp_unitary(HADAMARD_ANGLE)):
        s = apply_unitary(u, s)
    return s


def make_oracle(kind: OracleKind, gate_source=IDEAL) -> Oracle:
    if gate_source == IDEAL:
        return Oracle(kind, oracle_unitary(kind))
    if isinstance(gate_source, SagnacConfig):
        expected = config_for(kind)
        if gate_source != expected:
            raise ConfigurationError(
                f"bench config ({gate_source}) does not realize {kind.gate_name}; expected ({expected})"
            )
        return Oracle(kind, sagnac_unitary(gate_source))
    raise ConfigurationError(f"unknown gate source {gate_source!r}")


def run_deutsch(kind: OracleKind, phi: float, gate_source=IDEAL, *,
                mode: PrepMode = PrepMode.DIRECT) -> DeutschOutcome:
    """Prepare, query U_f once, apply the final polarization Hadamard, read out.

    ``gate_source`` is ``"ideal"`` (the truth-table permutation) or a ``SagnacConfig``,
    which must be the bench configuration for ``kind``.
    """
    oracle = make_oracle(kind, gate_source)
    state = prepare_input(phi, mode)
    state = oracle.apply(state)
    state = apply_unitary(hwp_unitary(HADAMARD_ANGLE), state)
    source = IDEAL if gate_source == IDEAL else f"sagnac({gate_source})"
    return DeutschOutcome(kind, state, pol_marginal(state), float(phi), source, oracle.queries)


def is_proper_phase(phi: float, tol: float = DEFAULT_CLASSIFY_TOL) -> bool:
    """True when a balanced function sends the photon to D1 with probability >= 1 - tol."""
    return (1.0 + np.cos(phi)) / 2.0 <= tol


def classify(outcome: DeutschOutcome, tol: float = DEFAULT_CLASSIFY_TOL) -> FunctionClass:
    """Decide the function class from one outcome.

    A decision is only made at a proper phase, where the two classes give
    orthogonal readouts. Elsewhere a V click is also possible for a balanced
    function (at phi = 2N pi it is certain), so the result is Indeterminate.
    """
    if not 0.0 < tol < 0.5:
        raise ValueError(f"tol must lie in (0, 0.5), got {tol}")
    if not is_proper_phase(outcome.phi, tol):
        return FunctionClass.INDETERMINATE
    if outcome.probs.p_v >= 1.0 - tol:
        return FunctionClass.CONSTANT
    if outcome.probs.p_h >= 1.0 - tol:
        return FunctionClass.BALANCED
    return FunctionClass.INDETERMINATE


def classical_evaluations(kind: OracleKind) -> tuple[FunctionClass, int]:
    oracle = make_oracle(kind)
    same = oracle.evaluate(0) == oracle.evaluate(1)
    return (FunctionClass.CONSTANT if same else FunctionClass.BALANCED), oracle.queries


def expected_output(kind: OracleKind, phi: float) -> StateVector:
    """Closed-form output states, written out per oracle.

    Constant: |V>(|u> + e^{i phi}|d>)/sqrt(2) for I, |V>(|d> + e^{i phi}|u>)/sqrt(2)
    for NOT. Balanced: [(1+e)|V>(|u>+|d>) +/- (1-e)|H>(|u>-|d>)]/(2 sqrt 2),
    sign + for CNOT and - for Z-CNOT.
    """
    e = np.exp(1j * phi)
    if kind is OracleKind.CONSTANT_ZERO:
        return StateVector(np.array([1.0, e, 0.0, 0.0]) / np.sqrt(2.0))
    if kind is OracleKind.CONSTANT_ONE:
        return StateVector(np.array([e, 1.0, 0.0, 0.0]) / np.sqrt(2.0))
    sign = 1.0 if kind is OracleKind.BALANCED_IDENTITY else -1.0
    amps = np.array([1 + e, 1 + e, sign * (1 - e), -sign * (1 - e)]) / (2.0 * np.sqrt(2.0))
    return StateVector(amps)
