import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sagnac_deutsch.optics import HADAMARD, OracleKind, oracle_unitary, pol_x
from sagnac_deutsch.qcore import (
    ConstructionError,
    InvalidInputError,
    PolProbs,
    StateVector,
    Unitary4,
    apply_unitary,
    compose,
    pol_marginal,
    tensor_lift,
)

from oracles import matmul, perm

CNOT = oracle_unitary(OracleKind.BALANCED_IDENTITY)

finite = st.floats(-10, 10, allow_nan=False)


@st.composite
def states(draw):
    re = draw(st.lists(finite, min_size=4, max_size=4))
    im = draw(st.lists(finite, min_size=4, max_size=4))
    amps = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(amps) < 1e-3:
        amps = np.array([1, 0, 0, 0], dtype=complex)
    return StateVector(amps).normalize()


@st.composite
def unitaries(draw):
    # QR of a random complex matrix, phases fixed by R's diagonal
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return Unitary4(q * (d / np.abs(d)))


def test_identity_fixes_state():
    s = StateVector(np.array([0.5, 0.5j, -0.5, 0.5]))
    assert apply_unitary(Unitary4.identity(), s) == s


def test_cnot_fixes_symmetric_state():
    s = StateVector(np.ones(4) / 2)
    assert np.allclose(apply_unitary(CNOT, s).amps, np.ones(4) / 2, atol=1e-15)


def test_cnot_maps_H_l_to_H_d():
    out = apply_unitary(CNOT, StateVector.basis(2))
    assert out == StateVector.basis(3)


def test_non_finite_state_rejected():
    with pytest.raises(InvalidInputError):
        StateVector(np.array([np.nan, 0, 0, 0]))
    with pytest.raises(InvalidInputError):
        StateVector(np.array([np.inf, 0, 0, 0]))


def test_tensor_lift_identity():
    assert tensor_lift() == Unitary4.identity()


def test_tensor_lift_pol_x_is_index_swap():
    assert tensor_lift(pol_op=[[0, 1], [1, 0]]) == Unitary4.from_permutation({0: 2, 2: 0, 1: 3, 3: 1})


def test_tensor_lift_hadamard_on_oracle_output_state():
    phi = 0.73
    e = cmath.exp(1j * phi)
    before = StateVector(np.array([1, e, 1, e]) / 2)
    after = apply_unitary(tensor_lift(pol_op=HADAMARD), before)
    expected = StateVector(np.array([1, e, 0, 0]) / math.sqrt(2))
    assert after.equiv(expected)


def test_tensor_lift_rejects_non_unitary():
    with pytest.raises(ConstructionError):
        tensor_lift(pol_op=[[1, 1], [0, 1]])
    with pytest.raises(ConstructionError):
        tensor_lift(spat_op=np.eye(3))


def test_unitary_check_at_construction():
    with pytest.raises(ConstructionError):
        Unitary4(np.ones((4, 4)))


def test_compose_cnot_involution():
    assert compose(CNOT, CNOT) == Unitary4.identity()


def test_compose_identity_left():
    assert compose(Unitary4.identity(), CNOT) == CNOT


def test_conjugated_cnot_matches_explicit_multiplication():
    x = pol_x()
    got = compose(x, compose(CNOT, x))
    # independent oracle: nested-list products
    xl = perm({0: 2, 1: 3, 2: 0, 3: 1})
    cl = perm({0: 0, 1: 1, 2: 3, 3: 2})
    expected = matmul(xl, matmul(cl, xl))
    assert np.array_equal(got.m, np.array(expected, dtype=complex))
    assert expected == perm({0: 1, 1: 0, 2: 2, 3: 3})


@pytest.mark.parametrize(
    "amps, expected",
    [
        ([1, -1, 0, 0], (1.0, 0.0)),
        ([0, 0, 1, -1], (0.0, 1.0)),
        ([1, 1, 1, 1], (0.5, 0.5)),
    ],
)
def test_pol_marginal(amps, expected):
    s = StateVector(np.array(amps, dtype=complex)).normalize()
    probs = pol_marginal(s)
    assert (probs.p_v, probs.p_h) == pytest.approx(expected, abs=1e-12)


def test_pol_marginal_rejects_unnormalized():
    with pytest.raises(InvalidInputError):
        pol_marginal(StateVector(np.array([1, 1, 0, 0], dtype=complex)))


def test_polprobs_validates_sum():
    with pytest.raises(InvalidInputError):
        PolProbs(p_v=0.7, p_h=0.7)


def test_values_are_immutable():
    s = StateVector.basis(0)
    with pytest.raises(ValueError):
        s.amps[0] = 2


@given(unitaries(), states())
def test_norm_preserved(u, s):
    assert abs(apply_unitary(u, s).norm - 1.0) <= 1e-12


@given(unitaries(), unitaries())
def test_compose_stays_unitary(a, b):
    c = compose(a, b)
    assert np.all(np.abs(c.m @ c.m.conj().T - np.eye(4)) <= 1e-12)


@given(states())
def test_marginal_sums_to_one(s):
    p = pol_marginal(s)
    assert abs(p.p_v + p.p_h - 1.0) <= 1e-12
    assert 0.0 <= p.p_v <= 1.0 and 0.0 <= p.p_h <= 1.0


@given(states(), st.floats(-2 * math.pi, 2 * math.pi))
def test_global_phase_irrelevant(s, theta):
    rotated = StateVector(s.amps * cmath.exp(1j * theta))
    a, b = pol_marginal(s), pol_marginal(rotated)
    # |e^{i theta} z|^2 == |z|^2 up to floating-point rounding of the product
    assert a.p_v == pytest.approx(b.p_v, abs=4e-16)
    assert a.p_h == pytest.approx(b.p_h, abs=4e-16)
