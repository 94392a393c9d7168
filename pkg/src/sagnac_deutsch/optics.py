"""Optical elements of the bench as 4x4 unitaries, and the four oracle gates.

The Sagnac loop (PBS1 + dove prism) is modeled by its net input->output
permutation. Counter-propagating paths pick up the same phase, so the net
map carries no relative phase.

Note on the NOT configuration (PBS1 removed, DP at +45 deg): the prose
describing the bench says l->u and r->d, but the worked output state
``|V>(|d> + e^{i phi}|u>)/sqrt(2)`` requires l->d and r->u. The output-state
form is followed here, which is also the only choice that yields a NOT gate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .qcore import Unitary4, compose, tensor_lift

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


class DoveAngle(enum.Enum):
    PLUS_45 = 45
    MINUS_45 = -45

    @classmethod
    def parse(cls, value) -> "DoveAngle":
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise ValueError(f"dove prism angle must be +45 or -45, got {value!r}") from None

    def __str__(self):
        return f"{self.value:+d}"


@dataclass(frozen=True)
class SagnacConfig:
    pbs_present: bool
    dp: DoveAngle

    def __str__(self):
        return f"pbs={'on' if self.pbs_present else 'off'} dp={self.dp}"


class OracleKind(enum.Enum):
    """The four one-bit functions f and their truth tables (f(0), f(1))."""

    CONSTANT_ZERO = "const0"
    CONSTANT_ONE = "const1"
    BALANCED_IDENTITY = "id"
    BALANCED_INVERSE = "inv"

    @property
    def truth_table(self) -> tuple[int, int]:
        return _TRUTH_TABLES[self]

    def f(self, x: int) -> int:
        return self.truth_table[x]

    @property
    def is_constant(self) -> bool:
        return self in (OracleKind.CONSTANT_ZERO, OracleKind.CONSTANT_ONE)

    @property
    def is_balanced(self) -> bool:
        return not self.is_constant

    @property
    def gate_name(self) -> str:
        return _GATE_NAMES[self]


_TRUTH_TABLES = {
    OracleKind.CONSTANT_ZERO: (0, 0),
    OracleKind.CONSTANT_ONE: (1, 1),
    OracleKind.BALANCED_IDENTITY: (0, 1),
    OracleKind.BALANCED_INVERSE: (1, 0),
}

_GATE_NAMES = {
    OracleKind.CONSTANT_ZERO: "I",
    OracleKind.CONSTANT_ONE: "NOT",
    OracleKind.BALANCED_IDENTITY: "CNOT",
    OracleKind.BALANCED_INVERSE: "Z-CNOT",
}

# Net basis-index maps of the loop; index = 2*pol + spatial.
_SAGNAC_PERMUTATIONS = {
    (True, DoveAngle.PLUS_45): {0: 0, 1: 1, 2: 3, 3: 2},
    (True, DoveAngle.MINUS_45): {0: 1, 1: 0, 2: 2, 3: 3},
    (False, DoveAngle.MINUS_45): {0: 0, 1: 1, 2: 2, 3: 3},
    (False, DoveAngle.PLUS_45): {0: 1, 1: 0, 2: 3, 3: 2},
}

_CONFIGS = {
    OracleKind.CONSTANT_ZERO: SagnacConfig(False, DoveAngle.MINUS_45),
    OracleKind.CONSTANT_ONE: SagnacConfig(False, DoveAngle.PLUS_45),
    OracleKind.BALANCED_IDENTITY: SagnacConfig(True, DoveAngle.PLUS_45),
    OracleKind.BALANCED_INVERSE: SagnacConfig(True, DoveAngle.MINUS_45),
}


def hwp_jones(theta_deg: float) -> np.ndarray:
    """Half-wave plate Jones matrix, global phase dropped."""
    if not np.isfinite(theta_deg):
        raise ValueError("wave plate angle must be finite")
    t = np.deg2rad(2.0 * theta_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, s], [s, -c]])


def hwp_unitary(theta_deg: float) -> Unitary4:
    return tensor_lift(pol_op=hwp_jones(theta_deg))


def phase_shifter_unitary(phi: float) -> Unitary4:
    """PZT phase ``phi`` on the r path: diag(1, e^{i phi}) on the spatial qubit."""
    if not np.isfinite(phi):
        raise ValueError("phase must be finite")
    return tensor_lift(spat_op=np.diag([1.0, np.exp(1j * phi)]))


def beam_splitter_unitary() -> Unitary4:
    # 50/50 split with real coefficients so |l> -> (|l> + |r>)/sqrt(2)
    return tensor_lift(spat_op=HADAMARD)


def sagnac_unitary(cfg: SagnacConfig) -> Unitary4:
    return Unitary4.from_permutation(_SAGNAC_PERMUTATIONS[(cfg.pbs_present, cfg.dp)])


def oracle_unitary(kind: OracleKind) -> Unitary4:
    """|x, y> -> |x, y XOR f(x)> with x the polarization qubit."""
    mapping = {}
    for x in (0, 1):
        for y in (0, 1):
            mapping[2 * x + y] = 2 * x + (y ^ kind.f(x))
    return Unitary4.from_permutation(mapping)


def config_for(kind: OracleKind) -> SagnacConfig:
    return _CONFIGS[kind]


def kind_for_config(cfg: SagnacConfig) -> OracleKind:
    for kind, c in _CONFIGS.items():
        if c == cfg:
            return kind
    raise KeyError(cfg)


def pol_x() -> Unitary4:
    return tensor_lift(pol_op=PAULI_X)


def zcnot_by_conjugation() -> Unitary4:
    """(X (x) I) CNOT (X (x) I)."""
    x = pol_x()
    return compose(x, compose(oracle_unitary(OracleKind.BALANCED_IDENTITY), x))
