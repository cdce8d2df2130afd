import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moneydebt import ops, states
from moneydebt.errors import (
    IncompleteProjectors,
    NotNormalized,
    VacuumNotInSector,
    ZeroProbabilityCollapse,
)
from moneydebt.fock import build_basis


def test_state_vector_basics(b11):
    psi = states.StateVector([1, 1j, 0, 0], b11)
    assert psi.norm() == pytest.approx(math.sqrt(2))
    assert psi.normalized().norm() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 2
    with pytest.raises(ValueError):
        states.StateVector([1, 0], b11)


def test_vacuum_and_pairs(b11):
    np.testing.assert_array_equal(states.vacuum(b11).amplitudes, [1, 0, 0, 0])
    pair = states.qe_pair(b11)
    np.testing.assert_array_equal(pair.amplitudes, [0, 0, 0, 1])
    loan = states.loan_pair(b11)
    assert loan.meta["money_role"] == "mobile" and loan.meta["debt_role"] == "confined"
    np.testing.assert_array_equal(loan.amplitudes, pair.amplitudes)
    with pytest.raises(VacuumNotInSector):
        states.vacuum(build_basis(1, 1, sector=1))


def test_qe_pair_lands_on_expected_occupation(b22):
    psi = states.qe_pair(b22, 1, 0)
    assert abs(psi.amplitudes[b22.index_of("0110")]) == 1.0


def test_recombine(b11):
    back = states.recombine(states.loan_pair(b11))
    np.testing.assert_allclose(back.amplitudes, states.vacuum(b11).amplitudes)
    with pytest.raises(ZeroProbabilityCollapse):
        states.recombine(states.vacuum(b11))


def test_asset_and_bell():
    with pytest.raises(NotNormalized):
        states.asset_superposition(0.5, 0.5)
    bell = states.bell_qe()
    np.testing.assert_allclose(bell.amplitudes, [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0])
    assert bell.space.labels == ("money_valuation", "bond_valuation")
    with pytest.raises(ValueError):
        states.bell_qe("psi_minus")


def test_product_state():
    reg = ops.QubitRegister(("a", "b"))
    np.testing.assert_array_equal(states.product_state(reg, "ud").amplitudes, [0, 1, 0, 0])
    with pytest.raises(ValueError):
        states.product_state(reg, "u")


def test_fix_phase():
    out = states.fix_phase(np.array([0, -1j, 1]) / math.sqrt(2))
    assert out[1].real > 0 and abs(out[1].imag) < 1e-15


def test_projector_checks():
    reg = states.ASSET_REGISTER
    up, down = ops.qubit_projectors(reg, "asset")
    states.check_projectors([up, down], reg)
    with pytest.raises(IncompleteProjectors):
        states.check_projectors([up], reg)
    with pytest.raises(IncompleteProjectors):
        states.check_projectors([], reg)


def test_measure_deterministic_and_collapses():
    psi = states.asset_superposition(math.sqrt(0.3), math.sqrt(0.7))
    projs = ops.qubit_projectors(states.ASSET_REGISTER, "asset")
    a = states.measure(psi, projs, 42)
    b = states.measure(psi, projs, 42)
    assert a[0] == b[0]
    np.testing.assert_array_equal(a[1].amplitudes, b[1].amplitudes)
    np.testing.assert_allclose(np.abs(a[1].amplitudes), np.eye(2)[a[0]])
    # outcome is decided by the first uniform draw of the seeded generator
    u = np.random.default_rng(42).random()
    assert a[0] == int(u >= 0.3)


def test_born_frequencies_seed_battery():
    psi = states.asset_superposition(math.sqrt(0.6), -math.sqrt(0.4))
    projs = ops.qubit_projectors(states.ASSET_REGISTER, "asset")
    hits = sum(states.measure(psi, projs, s)[0] == 0 for s in range(4000))
    assert abs(hits / 4000 - 0.6) < 4 * math.sqrt(0.24 / 4000)


def test_bell_measurement_collapses_partner():
    bell = states.bell_qe()
    projs = ops.qubit_projectors(bell.space, "money_valuation")
    for seed in range(20):
        k, post = states.measure(bell, projs, seed)
        other = ops.qubit_projectors(bell.space, "bond_valuation")
        p = states.probabilities(post, other)
        np.testing.assert_allclose(p, [k, 1 - k], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(0, 2**32 - 1))
def test_measurement_idempotent(p, seed):
    psi = states.asset_superposition(math.sqrt(p), math.sqrt(1 - p))
    projs = ops.qubit_projectors(states.ASSET_REGISTER, "asset")
    k, post = states.measure(psi, projs, seed)
    for s in range(3):
        k2, post2 = states.measure(post, projs, seed + s + 1)
        assert k2 == k
        np.testing.assert_allclose(post2.amplitudes, post.amplitudes)


def test_zero_weight_outcome_never_selected():
    psi = states.asset_superposition(1.0, 0.0)
    projs = ops.qubit_projectors(states.ASSET_REGISTER, "asset")
    assert all(states.measure(psi, projs, s)[0] == 0 for s in range(200))
