"""Linear algebra on the single-photon two-qubit space.

One photon carries two qubits: polarization (V=0, H=1) and spatial mode
(l/u=0, r/d=1). Basis index is ``b = 2*pol + spatial``, so the ordered basis
is |V,0>, |V,1>, |H,0>, |H,1>.

Input labels (l, r) and output labels (u, d) share the spatial indices; the
relabeling across the Sagnac loop is bookkeeping only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ALGEBRA_TOL = 1e-12
INPUT_TOL = 1e-9

V, H = 0, 1
L, R = 0, 1
U, D = 0, 1


class InvalidInputError(ValueError):
    """Raised for non-finite or unnormalized inputs."""


class ConstructionError(ValueError):
    """Raised when a matrix fails its unitarity check."""


def basis_index(pol: int, spatial: int) -> int:
    return 2 * pol + spatial


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


def _is_unitary(m: np.ndarray, tol: float) -> bool:
    n = m.shape[0]
    return bool(np.all(np.abs(m @ m.conj().T - np.eye(n)) <= tol))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Four complex amplitudes over the |pol, spatial> basis."""

    amps: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.amps)
        if arr.shape != (4,):
            raise InvalidInputError(f"state needs 4 amplitudes, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("state amplitudes must be finite")
        object.__setattr__(self, "amps", arr)

    @classmethod
    def basis(cls, index: int) -> "StateVector":
        amps = np.zeros(4, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def product(cls, pol_amps, spatial_amps) -> "StateVector":
        """|pol> (x) |spatial>, normalized."""
        return cls(np.kron(np.asarray(pol_amps, complex), np.asarray(spatial_amps, complex))).normalize()

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalize(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise InvalidInputError("cannot normalize the zero vector")
        return StateVector(self.amps / n)

    def overlap(self, other: "StateVector") -> float:
        """|<self|other>|, which is 1 for states equal up to global phase."""
        return float(abs(np.vdot(self.amps, other.amps)))

    def equiv(self, other: "StateVector", tol: float = ALGEBRA_TOL) -> bool:
        return self.overlap(other) >= 1.0 - tol

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return bool(np.array_equal(self.amps, other.amps))

    def __hash__(self):
        return hash(self.amps.tobytes())

    def __repr__(self):
        return f"StateVector({np.array2string(self.amps, precision=6)})"


@dataclass(frozen=True, eq=False)
class Unitary4:
    """A 4x4 unitary, checked at construction."""

    m: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.m)
        if arr.shape != (4, 4):
            raise ConstructionError(f"expected a 4x4 matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("matrix entries must be finite")
        if not _is_unitary(arr, ALGEBRA_TOL):
            raise ConstructionError("matrix is not unitary within 1e-12")
        object.__setattr__(self, "m", arr)

    @classmethod
    def identity(cls) -> "Unitary4":
        return cls(np.eye(4))

    @classmethod
    def from_permutation(cls, mapping: dict[int, int]) -> "Unitary4":
        """Permutation matrix sending basis state ``i`` to ``mapping[i]``."""
        m = np.zeros((4, 4))
        for src, dst in mapping.items():
            m[dst, src] = 1.0
        return cls(m)

    def is_permutation(self) -> bool:
        m = self.m
        binary = np.all((m == 0) | (m == 1))
        return bool(binary and np.all(m.sum(axis=0) == 1) and np.all(m.sum(axis=1) == 1))

    def allclose(self, other: "Unitary4", tol: float = ALGEBRA_TOL) -> bool:
        return bool(np.all(np.abs(self.m - other.m) <= tol))

    def __matmul__(self, other):
        if isinstance(other, Unitary4):
            return compose(self, other)
        if isinstance(other, StateVector):
            return apply_unitary(self, other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Unitary4):
            return NotImplemented
        return bool(np.array_equal(self.m, other.m))

    def __hash__(self):
        return hash(self.m.tobytes())

    def __repr__(self):
        return f"Unitary4(\n{np.array2string(self.m, precision=6)})"


@dataclass(frozen=True)
class PolProbs:
    """Polarization readout: ``p_h`` clicks D1, ``p_v`` clicks D2."""

    p_v: float
    p_h: float

    def __post_init__(self):
        for name in ("p_v", "p_h"):
            p = getattr(self, name)
            if not (np.isfinite(p) and -ALGEBRA_TOL <= p <= 1.0 + ALGEBRA_TOL):
                raise InvalidInputError(f"{name}={p} is not a probability")
        if abs(self.p_v + self.p_h - 1.0) > ALGEBRA_TOL:
            raise InvalidInputError(f"probabilities sum to {self.p_v + self.p_h}, not 1")

    @property
    def p_d1(self) -> float:
        return self.p_h

    @property
    def p_d2(self) -> float:
        return self.p_v


def _check_factor(op, name: str) -> np.ndarray:
    if op is None:
        return np.eye(2, dtype=complex)
    arr = np.asarray(op, dtype=complex)
    if arr.shape != (2, 2):
        raise ConstructionError(f"{name} factor must be 2x2, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} factor has non-finite entries")
    if not _is_unitary(arr, ALGEBRA_TOL):
        raise ConstructionError(f"{name} factor is not unitary within 1e-12")
    return arr


def tensor_lift(pol_op=None, spat_op=None) -> Unitary4:
    """Lift 2x2 polarization and spatial operators to ``pol_op (x) spat_op``.

    A missing factor acts as identity on its qubit.
    """
    return Unitary4(np.kron(_check_factor(pol_op, "polarization"), _check_factor(spat_op, "spatial")))


def apply_unitary(u: Unitary4, s: StateVector) -> StateVector:
    return StateVector(u.m @ s.amps)


def compose(u_last: Unitary4, u_first: Unitary4) -> Unitary4:
    """Matrix product ``u_last @ u_first`` (``u_first`` acts first)."""
    return Unitary4(u_last.m @ u_first.m)


def pol_marginal(s: StateVector) -> PolProbs:
    """Marginal polarization probabilities, summed over spatial modes."""
    p = np.abs(s.amps) ** 2
    total = float(p.sum())
    if abs(total - 1.0) > INPUT_TOL:
        raise InvalidInputError(f"state is not normalized (norm^2={total})")
    p_v = float(p[0] + p[1])
    p_h = float(p[2] + p[3])
    # absorb rounding so the pair sums to one exactly
    scale = p_v + p_h
    return PolProbs(p_v=p_v / scale, p_h=p_h / scale)
