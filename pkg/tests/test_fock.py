from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moneydebt.errors import DimensionTooLarge, EmptySector, IndexOutOfRange, NotInBasis
from moneydebt.fock import (
    FockBasis,
    ModeId,
    OccupationState,
    Species,
    build_basis,
    debt,
    index_of,
    money,
    occupation_of,
)


def test_mode_order_and_labels():
    b = build_basis(2, 3)
    assert [m.label for m in b.modes()] == ["m0", "m1", "d0", "d1", "d2"]
    assert b.position(debt(0)) == 2
    assert ModeId.parse("d2") == debt(2)
    assert str(money(1)) == "m1"
    with pytest.raises(ValueError):
        ModeId.parse("x1")
    with pytest.raises(ValueError):
        money(-1)


def test_string_convention_money_is_leading_bit(b11):
    assert list(b11.states) == [0, 1, 2, 3]
    assert b11.index_of("10") == 2
    assert str(b11.occupation_of(2)) == "10"
    assert b11.occupancy(money(0)).tolist() == [0, 0, 1, 1]
    assert b11.occupancy(debt(0)).tolist() == [0, 1, 0, 1]


def test_sector_enumeration_matches_brute_force():
    b = build_basis(2, 2, sector=0)
    assert list(b.states) == [0, 5, 6, 9, 10, 15]
    for m in range(4):
        for d in range(4):
            full = build_basis(m, d)
            for q in range(-d, m + 1):
                sec = build_basis(m, d, sector=q)
                charges = full.n_money() - full.n_debt_counts()
                expect = [s for s, c in zip(full.states, charges) if c == q]
                assert list(sec.states) == expect
                assert sec.dim == sum(comb(m, k) * comb(d, k - q) for k in range(max(q, 0), m + 1))


def test_empty_sector_and_caps():
    with pytest.raises(EmptySector):
        build_basis(1, 1, sector=2)
    with pytest.raises(DimensionTooLarge):
        build_basis(20, 20)
    with pytest.raises(ValueError):
        build_basis(-1, 0)


def test_lookup_errors(b11):
    with pytest.raises(IndexOutOfRange):
        b11.occupation_of(4)
    sec = build_basis(1, 1, sector=0)
    with pytest.raises(NotInBasis):
        sec.index_of("10")
    with pytest.raises(ValueError):
        b11.index_of("102")


def test_equality_and_hash():
    assert build_basis(2, 1) == build_basis(2, 1)
    assert hash(build_basis(2, 1, 0)) == hash(build_basis(2, 1, 0))
    assert build_basis(2, 1) != build_basis(1, 2)
    assert build_basis(1, 1) != build_basis(1, 1, 0)


def test_states_read_only(b22):
    with pytest.raises(ValueError):
        b22.states[0] = 3


def test_module_level_helpers(b22):
    assert index_of(b22, "1010") == b22.index_of("1010")
    assert str(occupation_of(b22, 3)) == "0011"
    assert isinstance(b22, FockBasis)
    assert Species("money") is Species.MONEY


@given(st.integers(0, 4), st.integers(0, 4), st.data())
def test_index_occupation_roundtrip(m, d, data):
    if m + d == 0:
        return
    b = build_basis(m, d)
    i = data.draw(st.integers(0, b.dim - 1))
    occ = b.occupation_of(i)
    assert b.index_of(occ) == i
    assert b.index_of(str(occ)) == i
    assert OccupationState.from_string(str(occ)) == occ


@given(st.integers(1, 4), st.integers(1, 4))
def test_sectors_partition_the_full_space(m, d):
    full = build_basis(m, d)
    parts = []
    for q in range(-d, m + 1):
        parts.extend(build_basis(m, d, sector=q).states.tolist())
    assert sorted(parts) == full.states.tolist()
    assert np.all(np.diff(full.states) > 0)
