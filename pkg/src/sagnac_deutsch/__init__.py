"""Single-photon two-qubit simulation of Deutsch's algorithm on a Sagnac-loop bench."""

from .deutsch import FunctionClass, PrepMode, classical_evaluations, classify, prepare_input, run_deutsch
from .optics import DoveAngle, OracleKind, SagnacConfig, config_for, oracle_unitary, sagnac_unitary
from .qcore import PolProbs, StateVector, Unitary4

__all__ = [
    "DoveAngle",
    "FunctionClass",
    "OracleKind",
    "PolProbs",
    "PrepMode",
    "SagnacConfig",
    "StateVector",
    "Unitary4",
    "classical_evaluations",
    "classify",
    "config_for",
    "oracle_unitary",
    "prepare_input",
    "run_deutsch",
    "sagnac_unitary",
]
